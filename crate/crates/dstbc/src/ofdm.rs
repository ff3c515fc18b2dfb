//! OFDM transmission for relays with symbol-level timing offsets: source
//! block modulation, cyclic prefix handling, relay schedules derived from a
//! design's row structure, the per-subcarrier equivalent model, and a
//! differential non-coherent mode.
//!
//! Integer delays up to the cyclic prefix length turn into per-subcarrier
//! phases `u_k^tau = exp(-i 2 pi k tau / N)` after prefix removal, so each
//! subcarrier sees the same space-time code as the synchronous chain with a
//! phase-rotated equivalent channel. Time reversal of selected slots makes
//! conjugated symbols come out of the destination DFT with the same phase
//! law, which is what lets conjugate designs ride on OFDM unchanged.

use std::cell::RefCell;
use std::collections::BTreeSet;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::algebra::CMatrix;
use crate::design::{DesignError, LinearSpaceTimeDesign};
use crate::relay::{sample_cn, ChannelRealization, CVector, PowerSplit, RelayError};

/// Tolerance for classifying design entries.
const ENTRY_TOL: f64 = 1e-9;
/// Tolerance for the scaled-unitary codebook check.
const SCALED_UNITARY_TOL: f64 = 1e-9;
/// Tolerance for the relay-matrix commutation check.
pub const COMMUTATION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OfdmError {
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cyclic prefix length {l_cp} exceeds the subcarrier count {n}")]
    PrefixTooLong { n: usize, l_cp: usize },
    #[error("relay delay {delay} exceeds the cyclic prefix length {l_cp}")]
    DelayTooLarge { delay: usize, l_cp: usize },
    #[error("entry ({row}, {col}) is not conjugate-linear in the complex symbols")]
    NotConjugateLinear { row: usize, col: usize },
    #[error("column {col} mixes plain and conjugated symbols")]
    MixedColumn { col: usize },
    #[error("design cannot be scheduled: {0}")]
    Unschedulable(String),
    #[error("entry ({row}, {col}) has a non-real coefficient; relays only scale by real gains")]
    NonRealGain { row: usize, col: usize },
    #[error("codeword {index} is not scaled-unitary")]
    NotScaledUnitary { index: usize },
    #[error(transparent)]
    Relay(#[from] RelayError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Frame geometry: `n` subcarriers and a cyclic prefix of `l_cp` samples.
#[derive(Clone, Copy, Debug)]
pub struct OfdmParams {
    pub n: usize,
    pub l_cp: usize,
}

impl OfdmParams {
    pub fn new(n: usize, l_cp: usize) -> Result<Self, OfdmError> {
        if n == 0 || l_cp > n {
            return Err(OfdmError::PrefixTooLong { n, l_cp });
        }
        Ok(Self { n, l_cp })
    }

    /// Samples per OFDM symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.n + self.l_cp
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(x: &CVector, inverse: bool) -> CVector {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().copied().collect();
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        fft.process(&mut buf);
    });
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.);
    CVector::from_iterator(n, buf.into_iter().map(|v| v * scale))
}

/// Unitary discrete Fourier transform.
pub fn dft(x: &CVector) -> CVector {
    transform(x, false)
}

/// Unitary inverse discrete Fourier transform.
pub fn idft(x: &CVector) -> CVector {
    transform(x, true)
}

/// Circular time reversal on the payload: index 0 is fixed, index `n` maps
/// to `N - n`. With unitary transforms this gives `DFT(zeta(DFT(x))) = x`.
pub fn time_reverse(x: &CVector) -> CVector {
    let n = x.len();
    CVector::from_fn(n, |i, _| x[(n - i) % n])
}

/// Prepend the last `l_cp` payload samples as a cyclic prefix.
pub fn add_cp(x: &CVector, l_cp: usize) -> CVector {
    let n = x.len();
    DVector::from_fn(n + l_cp, |m, _| x[(m + n - l_cp) % n])
}

/// Drop the prefix; for time-reversed slots additionally rotate the last
/// `l_cp` payload samples to the front.
pub fn remove_cp_with_shift(y: &CVector, l_cp: usize, shifted: bool) -> Result<CVector, OfdmError> {
    if y.len() <= l_cp {
        return Err(OfdmError::LengthMismatch {
            expected: l_cp + 1,
            got: y.len(),
        });
    }
    let n = y.len() - l_cp;
    let payload = y.rows(l_cp, n).into_owned();
    if !shifted {
        return Ok(payload);
    }
    Ok(CVector::from_fn(n, |i, _| payload[(i + n - l_cp) % n]))
}

/// One appearance of a complex symbol inside a design entry.
#[derive(Clone, Copy, Debug)]
struct EntryTerm {
    block: usize,
    coeff: Complex64,
    conjugated: bool,
}

/// Per-entry symbol appearances: `terms[row][col]` lists which complex
/// symbols (blocks) the entry carries, with coefficient and conjugation.
fn classify_entries(design: &LinearSpaceTimeDesign) -> Result<Vec<Vec<Vec<EntryTerm>>>, OfdmError> {
    let half = design.k() / 2;
    if design.k() % 2 != 0 {
        return Err(OfdmError::NotConjugateLinear { row: 0, col: 0 });
    }
    let scale: f64 = design
        .weights()
        .iter()
        .map(crate::design::max_abs_entry)
        .fold(1.0, f64::max);
    let tol = ENTRY_TOL * scale;
    let i_unit = Complex64::new(0., 1.);
    let mut out = vec![vec![Vec::new(); design.n_t()]; design.t()];
    for j in 0..half {
        let re = design.weight(2 * j);
        let im = design.weight(2 * j + 1);
        for row in 0..design.t() {
            for col in 0..design.n_t() {
                let a = re[(row, col)];
                let b = im[(row, col)];
                if a.norm() <= tol && b.norm() <= tol {
                    continue;
                }
                let conjugated = if (b - i_unit * a).norm() <= tol {
                    false
                } else if (b + i_unit * a).norm() <= tol {
                    true
                } else {
                    return Err(OfdmError::NotConjugateLinear { row, col });
                };
                out[row][col].push(EntryTerm {
                    block: j,
                    coeff: a,
                    conjugated,
                });
            }
        }
    }
    Ok(out)
}

/// Per-row symbol usage of a conjugate design: which complex symbols appear
/// plain and which conjugated, with the three structural conditions that
/// make the row set schedulable evaluated.
#[derive(Clone, Debug)]
pub struct RowStructure {
    plain: Vec<BTreeSet<usize>>,
    conjugated: Vec<BTreeSet<usize>>,
    pub disjoint: bool,
    pub balanced: bool,
    pub nested: bool,
    violations: Vec<String>,
}

impl RowStructure {
    /// Symbols appearing unconjugated in `row`.
    pub fn plain(&self, row: usize) -> &BTreeSet<usize> {
        &self.plain[row]
    }

    /// Symbols appearing conjugated in `row`.
    pub fn conjugated_set(&self, row: usize) -> &BTreeSet<usize> {
        &self.conjugated[row]
    }

    pub fn rows(&self) -> usize {
        self.plain.len()
    }

    /// All three conditions hold.
    pub fn passes(&self) -> bool {
        self.disjoint && self.balanced && self.nested
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

/// Split each row's symbols into plain and conjugated sets and evaluate the
/// schedulability conditions: the sets are disjoint, equally sized, and any
/// two rows' plain sets are nested or disjoint.
pub fn derive_row_structure(design: &LinearSpaceTimeDesign) -> Result<RowStructure, OfdmError> {
    let terms = classify_entries(design)?;
    let t = design.t();
    let mut plain = vec![BTreeSet::new(); t];
    let mut conjugated = vec![BTreeSet::new(); t];
    for (row, cols) in terms.iter().enumerate() {
        for entry in cols {
            for term in entry {
                if term.conjugated {
                    conjugated[row].insert(term.block);
                } else {
                    plain[row].insert(term.block);
                }
            }
        }
    }
    let mut violations = Vec::new();
    let mut disjoint = true;
    let mut balanced = true;
    let mut nested = true;
    for row in 0..t {
        if !plain[row].is_disjoint(&conjugated[row]) {
            disjoint = false;
            violations.push(format!("row {} uses a symbol both plain and conjugated", row));
        }
        if plain[row].len() != conjugated[row].len() {
            balanced = false;
            violations.push(format!(
                "row {} has {} plain but {} conjugated symbols",
                row,
                plain[row].len(),
                conjugated[row].len()
            ));
        }
    }
    for i in 0..t {
        for j in i + 1..t {
            let inter: BTreeSet<usize> = plain[i].intersection(&plain[j]).copied().collect();
            if !(inter.is_empty() || inter == plain[i] || inter == plain[j]) {
                nested = false;
                violations.push(format!("rows {} and {} overlap without nesting", i, j));
            }
        }
    }
    Ok(RowStructure {
        plain,
        conjugated,
        disjoint,
        balanced,
        nested,
        violations,
    })
}

/// What one relay does during one OFDM slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelayAction {
    Silence,
    Transmit {
        block: usize,
        gain: f64,
        conjugate: bool,
        reverse: bool,
    },
}

/// A complete relay transmission plan: which source blocks are
/// IDFT-modulated, which slots are time-reversed, and the per-relay
/// per-slot forwarding actions.
#[derive(Clone, Debug)]
pub struct OfdmSchedule {
    relay_conjugated: Vec<bool>,
    idft_blocks: Vec<bool>,
    reversed_slots: Vec<bool>,
    actions: Vec<Vec<RelayAction>>,
}

impl OfdmSchedule {
    pub fn relay_count(&self) -> usize {
        self.actions.len()
    }

    pub fn slot_count(&self) -> usize {
        self.reversed_slots.len()
    }

    pub fn block_count(&self) -> usize {
        self.idft_blocks.len()
    }

    /// Number of IDFT-modulated source blocks.
    pub fn idft_block_count(&self) -> usize {
        self.idft_blocks.iter().filter(|&&b| b).count()
    }

    pub fn relay_conjugated(&self) -> &[bool] {
        &self.relay_conjugated
    }

    pub fn idft_blocks(&self) -> &[bool] {
        &self.idft_blocks
    }

    pub fn reversed_slots(&self) -> &[bool] {
        &self.reversed_slots
    }

    /// `actions()[relay][slot]`.
    pub fn actions(&self) -> &[Vec<RelayAction>] {
        &self.actions
    }
}

/// Derive the transmission plan from a conjugate design. Each slot maps to
/// a design row and each relay to a column; the IDFT/DFT block assignment
/// and the set of time-reversed slots are fixed by a parity constraint
/// between blocks and slots (an entry's conjugation flag ties its block's
/// modulation to its slot's reversal), solved by 2-coloring with the lowest
/// slot of every connected component normalized to not-reversed.
pub fn build_schedule(design: &LinearSpaceTimeDesign) -> Result<OfdmSchedule, OfdmError> {
    let terms = classify_entries(design)?;
    let t = design.t();
    let n_relays = design.n_t();
    let blocks = design.k() / 2;

    let mut relay_conjugated = vec![false; n_relays];
    let mut relay_seen = vec![false; n_relays];
    for row in terms.iter() {
        for (col, entry) in row.iter().enumerate() {
            for term in entry {
                if relay_seen[col] && relay_conjugated[col] != term.conjugated {
                    return Err(OfdmError::MixedColumn { col });
                }
                relay_seen[col] = true;
                relay_conjugated[col] = term.conjugated;
            }
        }
    }

    // Parity constraints between slot nodes (0..t) and block nodes
    // (t..t+blocks): idft(block) XOR reversed(slot) = !conjugated.
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); t + blocks];
    for (row, cols) in terms.iter().enumerate() {
        for entry in cols {
            for term in entry {
                let parity = !term.conjugated;
                adj[row].push((t + term.block, parity));
                adj[t + term.block].push((row, parity));
            }
        }
    }
    // color[slot] = reversed?, color[t + block] = idft?; note the parity
    // relates reversed(slot) to idft(block) through XOR = parity.
    let mut color: Vec<Option<bool>> = vec![None; t + blocks];
    for seed in 0..t + blocks {
        if color[seed].is_some() {
            continue;
        }
        // Slots seed as not-reversed; blocks without any slot contact seed
        // as IDFT.
        color[seed] = Some(seed >= t);
        let mut queue = vec![seed];
        while let Some(node) = queue.pop() {
            let value = color[node].unwrap();
            for &(next, parity) in &adj[node] {
                let want = value ^ parity;
                match color[next] {
                    None => {
                        color[next] = Some(want);
                        queue.push(next);
                    }
                    Some(existing) if existing != want => {
                        let (slot, block) = if node < t { (node, next - t) } else { (next, node - t) };
                        return Err(OfdmError::Unschedulable(format!(
                            "slot {} and symbol {} need conflicting reversal/modulation classes",
                            slot, block
                        )));
                    }
                    _ => {}
                }
            }
        }
    }
    let reversed_slots: Vec<bool> = (0..t).map(|s| color[s].unwrap()).collect();
    let idft_blocks: Vec<bool> = (0..blocks).map(|b| color[t + b].unwrap()).collect();

    let mut actions = vec![vec![RelayAction::Silence; t]; n_relays];
    for (row, cols) in terms.iter().enumerate() {
        for (col, entry) in cols.iter().enumerate() {
            if entry.is_empty() {
                continue;
            }
            if entry.len() > 1 {
                return Err(OfdmError::Unschedulable(format!(
                    "entry ({}, {}) mixes {} symbols; a relay forwards one block per slot",
                    row,
                    col,
                    entry.len()
                )));
            }
            let term = entry[0];
            if term.coeff.im.abs() > ENTRY_TOL * term.coeff.norm().max(1.0) {
                return Err(OfdmError::NonRealGain { row, col });
            }
            actions[col][row] = RelayAction::Transmit {
                block: term.block,
                gain: term.coeff.re,
                conjugate: term.conjugated,
                reverse: reversed_slots[row],
            };
        }
    }
    Ok(OfdmSchedule {
        relay_conjugated,
        idft_blocks,
        reversed_slots,
        actions,
    })
}

/// Equivalent channel of subcarrier `k`: entry `i` is
/// `u_k^{tau_i} f_i g_i`, conjugating `f_i` for conjugating relays.
pub fn equivalent_channel(
    params: &OfdmParams,
    k: usize,
    channel: &ChannelRealization,
    delays: &[usize],
    conjugated: &[bool],
) -> Result<CVector, OfdmError> {
    let r = channel.f.len();
    if delays.len() != r || conjugated.len() != r {
        return Err(OfdmError::LengthMismatch {
            expected: r,
            got: delays.len().min(conjugated.len()),
        });
    }
    for &delay in delays {
        if delay > params.l_cp {
            return Err(OfdmError::DelayTooLarge {
                delay,
                l_cp: params.l_cp,
            });
        }
    }
    Ok(CVector::from_fn(r, |i, _| {
        let phase =
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * delays[i]) as f64 / params.n as f64);
        let f = if conjugated[i] {
            channel.f[i].conj()
        } else {
            channel.f[i]
        };
        phase * f * channel.g[i]
    }))
}

/// Noise covariance of the per-subcarrier model. Delay phases cancel, so
/// this is the same `I + kappa sum |g_i|^2 B_i B_i^T` shape as the
/// synchronous chain, with the gain patterns read off the schedule.
pub fn subcarrier_noise_covariance(
    schedule: &OfdmSchedule,
    power: &PowerSplit,
    channel: &ChannelRealization,
) -> CMatrix {
    let t = schedule.slot_count();
    let kappa = power.amplify_factor().powi(2);
    let mut omega = CMatrix::identity(t, t);
    for (i, slots) in schedule.actions().iter().enumerate() {
        let weight = kappa * channel.g[i].norm_sqr();
        for s in 0..t {
            let RelayAction::Transmit { block, gain, .. } = slots[s] else {
                continue;
            };
            for s2 in 0..t {
                let RelayAction::Transmit {
                    block: block2,
                    gain: gain2,
                    ..
                } = slots[s2]
                else {
                    continue;
                };
                if block == block2 {
                    omega[(s, s2)] += Complex64::new(weight * gain * gain2, 0.);
                }
            }
        }
    }
    omega
}

/// Interleaved real symbols of subcarrier `k`.
pub fn subcarrier_symbol_vector(blocks: &[CVector], k: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * blocks.len());
    for b in blocks {
        x.push(b[k].re);
        x.push(b[k].im);
    }
    x
}

/// Reassemble per-block vectors from per-subcarrier symbol vectors.
pub fn blocks_from_symbols(per_subcarrier: &[CVector]) -> Vec<CVector> {
    let n = per_subcarrier.len();
    let j = per_subcarrier[0].len();
    (0..j)
        .map(|b| CVector::from_fn(n, |k, _| per_subcarrier[k][b]))
        .collect()
}

/// Run the full OFDM chain for one frame: source modulation and prefix,
/// relay conjugation/reversal/forwarding per the schedule, per-relay
/// integer delays, destination prefix removal and demodulation. Returns the
/// length-`slot_count` receive vector of every subcarrier. `noise = None`
/// runs the chain noise-free, in which case the output equals the
/// closed-form per-subcarrier model exactly.
pub fn simulate_async_frame<R: Rng>(
    schedule: &OfdmSchedule,
    params: &OfdmParams,
    power: &PowerSplit,
    channel: &ChannelRealization,
    delays: &[usize],
    blocks: &[CVector],
    mut noise: Option<&mut R>,
) -> Result<Vec<CVector>, OfdmError> {
    let n = params.n;
    let l_s = params.symbol_len();
    let n_relays = schedule.relay_count();
    let t = schedule.slot_count();
    if channel.f.len() != n_relays || channel.g.len() != n_relays || delays.len() != n_relays {
        return Err(OfdmError::LengthMismatch {
            expected: n_relays,
            got: channel.f.len().min(delays.len()),
        });
    }
    for &delay in delays {
        if delay > params.l_cp {
            return Err(OfdmError::DelayTooLarge {
                delay,
                l_cp: params.l_cp,
            });
        }
    }
    if blocks.len() != schedule.block_count() {
        return Err(OfdmError::LengthMismatch {
            expected: schedule.block_count(),
            got: blocks.len(),
        });
    }
    for b in blocks {
        if b.len() != n {
            return Err(OfdmError::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
    }
    power.validate(n_relays)?;

    let source_scale = Complex64::new((power.pi1 * power.p).sqrt(), 0.);
    let rho = power.amplify_factor();

    // Source phase: modulate each block and add the prefix.
    let sent: Vec<CVector> = blocks
        .iter()
        .zip(schedule.idft_blocks())
        .map(|(b, &is_idft)| {
            let payload = if is_idft { idft(b) } else { dft(b) };
            add_cp(&payload, params.l_cp) * source_scale
        })
        .collect();

    // Relay phase: materialize each relay's noisy receive once per block it
    // forwards, then apply conjugation, reversal, and gain.
    let mut transmissions: Vec<Vec<Option<CVector>>> = vec![vec![None; t]; n_relays];
    for i in 0..n_relays {
        let mut received: Vec<Option<CVector>> = vec![None; schedule.block_count()];
        for s in 0..t {
            let RelayAction::Transmit {
                block,
                gain,
                conjugate,
                reverse,
            } = schedule.actions()[i][s]
            else {
                continue;
            };
            if received[block].is_none() {
                let mut r = &sent[block] * channel.f[i];
                if let Some(rng) = noise.as_deref_mut() {
                    for m in 0..l_s {
                        r[m] += sample_cn(rng);
                    }
                }
                received[block] = Some(r);
            }
            let r = received[block].as_ref().unwrap();
            let processed = if conjugate { r.map(|v| v.conj()) } else { r.clone() };
            let symbol = if reverse {
                let payload = processed.rows(params.l_cp, n).into_owned();
                let rev = time_reverse(&payload);
                CVector::from_fn(l_s, |m, _| rev[m % n])
            } else {
                processed
            };
            transmissions[i][s] = Some(symbol * Complex64::new(rho * gain, 0.));
        }
    }

    // Destination phase: superimpose delayed relay symbols per slot, remove
    // the prefix (with the extra rotation on reversed slots), demodulate.
    let mut per_slot = Vec::with_capacity(t);
    for s in 0..t {
        let mut window = CVector::zeros(l_s);
        for i in 0..n_relays {
            if let Some(symbol) = &transmissions[i][s] {
                for m in delays[i]..l_s {
                    window[m] += symbol[m - delays[i]] * channel.g[i];
                }
            }
        }
        if let Some(rng) = noise.as_deref_mut() {
            for m in 0..l_s {
                window[m] += sample_cn(rng);
            }
        }
        let kept = remove_cp_with_shift(&window, params.l_cp, schedule.reversed_slots()[s])?;
        per_slot.push(dft(&kept));
    }

    Ok((0..n)
        .map(|k| CVector::from_fn(t, |s, _| per_slot[s][k]))
        .collect())
}

fn scaled_unitary_scale(c: &CMatrix, index: usize) -> Result<f64, OfdmError> {
    let gram = c.adjoint() * c;
    let dim = gram.nrows();
    let b2: f64 = (0..dim).map(|i| gram[(i, i)].re).sum::<f64>() / dim as f64;
    if b2 <= 0.0 {
        return Err(OfdmError::NotScaledUnitary { index });
    }
    for r in 0..dim {
        for col in 0..dim {
            let expect = if r == col {
                Complex64::new(b2, 0.)
            } else {
                Complex64::new(0., 0.)
            };
            if (gram[(r, col)] - expect).norm() > SCALED_UNITARY_TOL * b2.max(1.0) {
                return Err(OfdmError::NotScaledUnitary { index });
            }
        }
    }
    Ok(b2.sqrt())
}

/// Codebook of scaled-unitary matrices for differential transmission, each
/// stored with its scale `b` where `C^H C = b^2 I`.
#[derive(Clone, Debug)]
pub struct DifferentialCodebook {
    codewords: Vec<CMatrix>,
    scales: Vec<f64>,
}

impl DifferentialCodebook {
    pub fn new(codewords: Vec<CMatrix>) -> Result<Self, OfdmError> {
        let mut scales = Vec::with_capacity(codewords.len());
        for (index, c) in codewords.iter().enumerate() {
            scales.push(scaled_unitary_scale(c, index)?);
        }
        Ok(Self { codewords, scales })
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, index: usize) -> &CMatrix {
        &self.codewords[index]
    }

    /// Scale `b` of codeword `index`.
    pub fn scale(&self, index: usize) -> f64 {
        self.scales[index]
    }

    pub fn codewords(&self) -> &[CMatrix] {
        &self.codewords
    }
}

/// The 256-codeword scaled-unitary codebook for four relays: the
/// permutation-structured four-group design at one quarter scale, with each
/// in-phase/quadrature pair drawn from the axis set
/// `{(±1/√3, 0), (0, ±√(5/3))}` so that every codeword satisfies
/// `C^H C = b^2 I` with `E[b^2] = 1`.
pub fn four_relay_differential_codebook() -> DifferentialCodebook {
    let design = crate::construct::regular_design(crate::algebra::Signature::new(2, 1)).unwrap();
    let a = 1.0 / 3f64.sqrt();
    let b = (5.0f64 / 3.0).sqrt();
    let axis = [[a, 0.0], [-a, 0.0], [0.0, b], [0.0, -b]];
    let mut codewords = Vec::with_capacity(256);
    for index in 0..256usize {
        let digits = [
            (index >> 6) & 3,
            (index >> 4) & 3,
            (index >> 2) & 3,
            index & 3,
        ];
        let p: Vec<[f64; 2]> = digits.iter().map(|&d| axis[d]).collect();
        // Pair layout: (z1I, z2I), (z1Q, z2Q), (z3I, z4I), (z3Q, z4Q).
        let x = [
            p[0][0], p[1][0], p[0][1], p[1][1], p[2][0], p[3][0], p[2][1], p[3][1],
        ];
        codewords.push(design.matrix_at(&x) * Complex64::new(0.5, 0.));
    }
    DifferentialCodebook::new(codewords).unwrap()
}

/// Reference symbol vector opening a differential chain.
pub fn initial_reference(r: usize) -> CVector {
    CVector::from_fn(r, |i, _| {
        if i == 0 {
            Complex64::new((r as f64).sqrt(), 0.)
        } else {
            Complex64::new(0., 0.)
        }
    })
}

/// One differential encoding step: `a_t = (1 / b_prev) C a_prev`. Returns
/// the new symbol vector together with the codeword's own scale, which
/// becomes `b_prev` for the next step.
pub fn differential_encode(
    c: &CMatrix,
    a_prev: &CVector,
    b_prev: f64,
) -> Result<(CVector, f64), OfdmError> {
    let b = scaled_unitary_scale(c, 0)?;
    Ok((c * a_prev * Complex64::new(1.0 / b_prev, 0.), b))
}

/// Non-coherent decoding of one frame pair: the codeword minimizing
/// `|| y_t - (1 / b_prev) C y_prev ||^2`, ties to the lowest index.
pub fn differential_decode(
    y_t: &CVector,
    y_prev: &CVector,
    b_prev: f64,
    codebook: &DifferentialCodebook,
) -> usize {
    let mut best = 0;
    let mut best_metric = f64::INFINITY;
    for (index, c) in codebook.codewords.iter().enumerate() {
        let predicted = c * y_prev * Complex64::new(1.0 / b_prev, 0.);
        let metric: f64 = (y_t - predicted).iter().map(|v| v.norm_sqr()).sum();
        if metric < best_metric {
            best_metric = metric;
            best = index;
        }
    }
    best
}

/// True when every codeword commutes with the plain relays' matrices and
/// conjugate-commutes (`C B = B C^*`) with the conjugating relays'.
pub fn check_commutation(
    codewords: &[CMatrix],
    relay_matrices: &[CMatrix],
    conjugated: &[bool],
) -> bool {
    for c in codewords {
        for (b, &conj) in relay_matrices.iter().zip(conjugated) {
            let rhs = if conj { b * c.map(|v| v.conj()) } else { b * c };
            let diff = c * b - rhs;
            let scale = crate::design::max_abs_entry(&(c * b)).max(1.0);
            if crate::design::max_abs_entry(&diff) > COMMUTATION_TOL * scale {
                return false;
            }
        }
    }
    true
}
