//! Distributed space-time block codes for amplify-and-forward relay networks.
//!
//! The crate covers the full pipeline from algebraic code construction to
//! error-rate simulation:
//!
//! * [`algebra`] — extended Clifford algebras and their left regular
//!   representations, the machinery behind every code family here.
//! * [`design`] — linear space-time designs: rate, linear independence,
//!   multi-group decodability, unitary-weight (CUWD) verification, and a
//!   plain-text serialization format.
//! * [`construct`] — the named code families: maximum-rate CUWDs, ABBA
//!   codes, tensor-product CUWDs, PCIODs, and a handful of reference codes.
//! * [`precode`] — signal-set design for full diversity: joint
//!   diagonalization, constellation rotations, product distance, coding gain.
//! * [`relay`] — the two-phase amplify-and-forward relay channel, its noise
//!   statistics, and whitened full/multi-group ML decoding.
//! * [`ofdm`] — OFDM framing for relays that are not time-synchronized:
//!   time-reversal schedules, the per-subcarrier equivalent model, and a
//!   differential (non-coherent) mode.
//! * [`sweep`] — seeded, reproducible codeword-error-rate experiments with
//!   CSV output and diversity-slope estimation.

pub mod algebra;
pub mod construct;
pub mod design;
pub mod ofdm;
pub mod precode;
pub mod relay;
pub mod sweep;

pub use algebra::{AlgebraElement, Monomial, Signature};
pub use design::LinearSpaceTimeDesign;
