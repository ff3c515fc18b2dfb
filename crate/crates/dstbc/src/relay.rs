//! Two-phase amplify-and-forward relay network: relay-matrix extraction from
//! conjugate designs, noise covariance at the destination, full and
//! multi-group ML decoding.
//!
//! The source broadcasts a scaled symbol vector; each relay applies its
//! relay matrix to the received vector or its conjugate and forwards the
//! result. The destination sees `y = sqrt(c) X h + n` where the columns of
//! `X` are the relay contributions, `h` collects the compound channel gains,
//! and the noise `n` has covariance `Gamma` shaped by the relay matrices.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::algebra::CMatrix;
use crate::design::{DesignError, LinearSpaceTimeDesign};
use crate::precode::{PrecodeError, StbcCodebook};

pub type CVector = DVector<Complex64>;

/// Tolerance for classifying design columns as conjugated or plain.
const COLUMN_CLASS_TOL: f64 = 1e-9;
/// Off-diagonal tolerance for row-orthogonality checks.
const ROW_ORTHO_TOL: f64 = 1e-12;
/// Tolerance for the whitened separability condition.
pub const MULTIGROUP_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RelayError {
    #[error("column {column} mixes plain and conjugated symbols; not a conjugate design")]
    MixedColumn { column: usize },
    #[error("conjugate structure needs as many complex symbols as rows ({t}), design has {half_k}")]
    SymbolCount { t: usize, half_k: usize },
    #[error("design has an odd number of real symbols")]
    OddSymbolCount,
    #[error("relay matrix {index} has squared Frobenius norm {norm}, expected {expected}")]
    FrobeniusNorm {
        index: usize,
        norm: f64,
        expected: f64,
    },
    #[error("power fractions violate pi1 + R pi2 = 2 (got {got})")]
    PowerConstraint { got: f64 },
    #[error("{0}")]
    DimensionMismatch(String),
    #[error("whitened separability fails for groups {i} and {j} (residual {residual:.3e})")]
    ConditionViolated { i: usize, j: usize, residual: f64 },
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Precode(#[from] PrecodeError),
}

/// Relay matrices read off a conjugate design: `matrices[j]` maps the
/// symbol vector (or its conjugate, per `conjugated[j]`) to column `j` of
/// the codeword. `m` counts the plain columns.
#[derive(Clone, Debug)]
pub struct RelayStructure {
    pub matrices: Vec<CMatrix>,
    pub conjugated: Vec<bool>,
    pub m: usize,
}

/// Read the per-relay matrices off a design in which every column is a
/// function of only the complex symbols or only their conjugates. Columns
/// keep their original order; `conjugated` flags which ones carry
/// conjugates.
pub fn extract_relay_structure(design: &LinearSpaceTimeDesign) -> Result<RelayStructure, RelayError> {
    let t = design.t();
    let k = design.k();
    if k % 2 != 0 {
        return Err(RelayError::OddSymbolCount);
    }
    let half = k / 2;
    if half != t {
        return Err(RelayError::SymbolCount { t, half_k: half });
    }
    let scale: f64 = design
        .weights()
        .iter()
        .map(crate::design::max_abs_entry)
        .fold(1.0, f64::max);
    let tol = COLUMN_CLASS_TOL * scale;
    let i_unit = Complex64::new(0., 1.);

    let mut matrices = Vec::with_capacity(design.n_t());
    let mut conjugated = Vec::with_capacity(design.n_t());
    for col in 0..design.n_t() {
        let mut flag: Option<bool> = None;
        let mut b = CMatrix::zeros(t, t);
        for j in 0..half {
            let a_re = design.weight(2 * j).column(col);
            let a_im = design.weight(2 * j + 1).column(col);
            let norm_re: f64 = a_re.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let norm_im: f64 = a_im.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if norm_re <= tol && norm_im <= tol {
                continue;
            }
            let plain_residual: f64 = a_im
                .iter()
                .zip(a_re.iter())
                .map(|(bi, ai)| (bi - i_unit * ai).norm())
                .fold(0.0, f64::max);
            let conj_residual: f64 = a_im
                .iter()
                .zip(a_re.iter())
                .map(|(bi, ai)| (bi + i_unit * ai).norm())
                .fold(0.0, f64::max);
            let this_flag = if plain_residual <= tol {
                false
            } else if conj_residual <= tol {
                true
            } else {
                return Err(RelayError::MixedColumn { column: col });
            };
            match flag {
                None => flag = Some(this_flag),
                Some(f) if f != this_flag => {
                    return Err(RelayError::MixedColumn { column: col });
                }
                _ => {}
            }
            for r in 0..t {
                b[(r, j)] = a_re[r];
            }
        }
        conjugated.push(flag.unwrap_or(false));
        matrices.push(b);
    }
    let m = conjugated.iter().filter(|&&f| !f).count();
    Ok(RelayStructure {
        matrices,
        conjugated,
        m,
    })
}

/// True when `B B^H` is diagonal.
pub fn check_row_orthogonal(b: &CMatrix) -> bool {
    let gram = b * b.adjoint();
    let scale = crate::design::max_abs_entry(&gram).max(1.0);
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            if r != c && gram[(r, c)].norm() > ROW_ORTHO_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// Power bookkeeping shared by the synchronous and OFDM transmission
/// chains: the source spends `pi1 * p`, each relay `pi2 * p`, with the
/// budget constraint `pi1 + R pi2 = 2`.
#[derive(Clone, Copy, Debug)]
pub struct PowerSplit {
    pub pi1: f64,
    pub pi2: f64,
    pub p: f64,
}

impl PowerSplit {
    /// Equal-split default: `pi1 = 1`, `pi2 = 1/R`.
    pub fn balanced(r: usize, p: f64) -> Self {
        Self {
            pi1: 1.0,
            pi2: 1.0 / r as f64,
            p,
        }
    }

    pub fn validate(&self, r: usize) -> Result<(), RelayError> {
        let got = self.pi1 + r as f64 * self.pi2;
        if (got - 2.0).abs() > 1e-9 {
            return Err(RelayError::PowerConstraint { got });
        }
        Ok(())
    }

    /// Per-relay amplification applied to the received vector.
    pub fn amplify_factor(&self) -> f64 {
        (self.pi2 * self.p / (self.pi1 * self.p + 1.0)).sqrt()
    }

    /// Scale on `X h` in the closed-form receive model.
    pub fn closed_form_factor(&self) -> f64 {
        (self.pi1 * self.pi2 * self.p * self.p / (self.pi1 * self.p + 1.0)).sqrt()
    }
}

/// Network parameters: relay matrices with their conjugation flags and the
/// power split. Defaults follow the equal-split choice `pi1 = 1`,
/// `pi2 = 1/R`.
#[derive(Clone, Debug)]
pub struct RelayNetworkConfig {
    relay_matrices: Vec<CMatrix>,
    conjugated: Vec<bool>,
    power: PowerSplit,
}

impl RelayNetworkConfig {
    pub fn new(
        relay_matrices: Vec<CMatrix>,
        conjugated: Vec<bool>,
        total_power: f64,
    ) -> Result<Self, RelayError> {
        if relay_matrices.is_empty() || relay_matrices.len() != conjugated.len() {
            return Err(RelayError::DimensionMismatch(format!(
                "{} relay matrices with {} flags",
                relay_matrices.len(),
                conjugated.len()
            )));
        }
        let t = relay_matrices[0].nrows();
        for (index, b) in relay_matrices.iter().enumerate() {
            if b.nrows() != t || b.ncols() != t {
                return Err(RelayError::DimensionMismatch(format!(
                    "relay matrix {} is {}x{}, expected {}x{}",
                    index,
                    b.nrows(),
                    b.ncols(),
                    t,
                    t
                )));
            }
            let norm: f64 = b.iter().map(|v| v.norm_sqr()).sum();
            if (norm - t as f64).abs() > 1e-6 * t as f64 {
                return Err(RelayError::FrobeniusNorm {
                    index,
                    norm,
                    expected: t as f64,
                });
            }
        }
        let r = relay_matrices.len();
        Ok(Self {
            relay_matrices,
            conjugated,
            power: PowerSplit::balanced(r, total_power),
        })
    }

    /// Build a config directly from a conjugate design.
    pub fn from_design(
        design: &LinearSpaceTimeDesign,
        total_power: f64,
    ) -> Result<Self, RelayError> {
        let s = extract_relay_structure(design)?;
        Self::new(s.matrices, s.conjugated, total_power)
    }

    /// Override the power split, keeping the constraint `pi1 + R pi2 = 2`.
    pub fn with_powers(mut self, pi1: f64, pi2: f64) -> Result<Self, RelayError> {
        let power = PowerSplit {
            pi1,
            pi2,
            p: self.power.p,
        };
        power.validate(self.relay_count())?;
        self.power = power;
        Ok(self)
    }

    pub fn relay_count(&self) -> usize {
        self.relay_matrices.len()
    }

    pub fn block_length(&self) -> usize {
        self.relay_matrices[0].nrows()
    }

    pub fn relay_matrices(&self) -> &[CMatrix] {
        &self.relay_matrices
    }

    pub fn conjugated(&self) -> &[bool] {
        &self.conjugated
    }

    pub fn plain_relay_count(&self) -> usize {
        self.conjugated.iter().filter(|&&f| !f).count()
    }

    pub fn power(&self) -> &PowerSplit {
        &self.power
    }

    pub fn pi1(&self) -> f64 {
        self.power.pi1
    }

    pub fn pi2(&self) -> f64 {
        self.power.pi2
    }

    pub fn total_power(&self) -> f64 {
        self.power.p
    }

    /// Per-relay amplification applied to the received vector.
    pub fn amplify_factor(&self) -> f64 {
        self.power.amplify_factor()
    }

    /// Scale on `X h` in the closed-form receive model.
    pub fn closed_form_factor(&self) -> f64 {
        self.power.closed_form_factor()
    }
}

/// One draw of the source-relay and relay-destination channel gains.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn sample(r: usize, rng: &mut impl Rng) -> Self {
        Self {
            f: (0..r).map(|_| sample_cn(rng)).collect(),
            g: (0..r).map(|_| sample_cn(rng)).collect(),
        }
    }
}

/// Unit-variance circularly symmetric complex Gaussian sample.
pub fn sample_cn(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn sample_cn_vector(t: usize, rng: &mut impl Rng) -> CVector {
    CVector::from_fn(t, |_, _| sample_cn(rng))
}

/// Noise covariance at the destination.
#[derive(Clone, Debug)]
pub struct NoiseCovariance {
    pub gamma: CMatrix,
}

/// `Gamma = I + pi2 P / (pi1 P + 1) * sum_i |g_i|^2 B_i B_i^H`.
pub fn noise_covariance(config: &RelayNetworkConfig, channel: &ChannelRealization) -> NoiseCovariance {
    let t = config.block_length();
    let kappa = config.amplify_factor().powi(2);
    let mut gamma = CMatrix::identity(t, t);
    for (b, g) in config.relay_matrices().iter().zip(&channel.g) {
        gamma += (b * b.adjoint()) * Complex64::new(kappa * g.norm_sqr(), 0.);
    }
    NoiseCovariance { gamma }
}

fn is_diagonal(m: &CMatrix) -> bool {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c && m[(r, c)].norm() > 1e-14 * m[(r, r)].norm().max(1.0) {
                return false;
            }
        }
    }
    true
}

/// Hermitian inverse and inverse square root of a positive-definite matrix;
/// diagonal inputs take the entrywise closed form.
pub fn whitening_matrices(gamma: &CMatrix) -> (CMatrix, CMatrix) {
    let t = gamma.nrows();
    if is_diagonal(gamma) {
        let inv = CMatrix::from_fn(t, t, |r, c| {
            if r == c {
                Complex64::new(1.0 / gamma[(r, r)].re, 0.)
            } else {
                Complex64::new(0., 0.)
            }
        });
        let inv_sqrt = CMatrix::from_fn(t, t, |r, c| {
            if r == c {
                Complex64::new(1.0 / gamma[(r, r)].re.sqrt(), 0.)
            } else {
                Complex64::new(0., 0.)
            }
        });
        return (inv, inv_sqrt);
    }
    let eig = SymmetricEigen::new(gamma.clone());
    let v = &eig.eigenvectors;
    let mut inv = CMatrix::zeros(t, t);
    let mut inv_sqrt = CMatrix::zeros(t, t);
    for k in 0..t {
        let lambda = eig.eigenvalues[k];
        let col = v.column(k);
        let outer = &col * col.adjoint();
        inv += &outer * Complex64::new(1.0 / lambda, 0.);
        inv_sqrt += &outer * Complex64::new(1.0 / lambda.sqrt(), 0.);
    }
    (inv, inv_sqrt)
}

/// Compound channel vector: `f_j g_j` for plain relays, `f_j^* g_j` for
/// conjugating ones.
pub fn compound_channel(config: &RelayNetworkConfig, channel: &ChannelRealization) -> CVector {
    CVector::from_fn(config.relay_count(), |j, _| {
        if config.conjugated()[j] {
            channel.f[j].conj() * channel.g[j]
        } else {
            channel.f[j] * channel.g[j]
        }
    })
}

/// Codeword matrix as seen by the destination: column `j` is `B_j z` or
/// `B_j z^*`.
pub fn codeword_from_symbols(config: &RelayNetworkConfig, z: &CVector) -> CMatrix {
    let t = config.block_length();
    let mut x = CMatrix::zeros(t, config.relay_count());
    let z_conj = z.map(|v| v.conj());
    for (j, b) in config.relay_matrices().iter().enumerate() {
        let col = if config.conjugated()[j] { b * &z_conj } else { b * z };
        x.set_column(j, &col);
    }
    x
}

/// Complex symbol vector from interleaved real symbols.
pub fn complex_symbols(x: &[f64]) -> CVector {
    assert!(x.len() % 2 == 0, "need an even number of real symbols");
    CVector::from_fn(x.len() / 2, |j, _| Complex64::new(x[2 * j], x[2 * j + 1]))
}

/// Per-relay transmissions for one block: `t_j = amplify * B_j r_j` with
/// `r_j` the (possibly conjugated) noisy receive at relay `j`.
pub fn relay_transmissions(
    config: &RelayNetworkConfig,
    z: &CVector,
    channel: &ChannelRealization,
    rng: &mut impl Rng,
) -> Vec<CVector> {
    let t = config.block_length();
    let source_scale = (config.pi1() * config.total_power()).sqrt();
    let amp = Complex64::new(config.amplify_factor(), 0.);
    config
        .relay_matrices()
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let v = sample_cn_vector(t, rng);
            let r = z * (channel.f[j] * source_scale) + v;
            let processed = if config.conjugated()[j] {
                b * r.map(|x| x.conj())
            } else {
                b * r
            };
            processed * amp
        })
        .collect()
}

/// Run the explicit two-phase chain and return the destination receive
/// vector. With the generator producing zeros this reduces to the
/// closed-form `sqrt(c) X h`.
pub fn simulate_two_phase(
    config: &RelayNetworkConfig,
    z: &CVector,
    channel: &ChannelRealization,
    rng: &mut impl Rng,
) -> Result<CVector, RelayError> {
    if z.len() != config.block_length() {
        return Err(RelayError::DimensionMismatch(format!(
            "symbol vector of length {} for block length {}",
            z.len(),
            config.block_length()
        )));
    }
    let t = config.block_length();
    let mut y = sample_cn_vector(t, rng);
    for (j, tj) in relay_transmissions(config, z, channel, rng).iter().enumerate() {
        y += tj * channel.g[j];
    }
    Ok(y)
}

/// Full ML decoding against an explicit equivalent channel and noise
/// covariance: minimize the whitened distance to `scale * X_k h` over the
/// codebook, breaking ties toward the lowest index. This is the decoder for
/// any receive model of the form `y = scale * X h + n`, which covers both
/// the synchronous chain and the per-subcarrier OFDM model.
pub fn ml_decode_full_with(
    y: &CVector,
    codebook: &StbcCodebook,
    h: &CVector,
    gamma: &CMatrix,
    scale: f64,
) -> Result<usize, RelayError> {
    let n = codebook.codeword_count();
    if n == 0 {
        return Err(RelayError::DimensionMismatch("empty codebook".into()));
    }
    let (_, whiten) = whitening_matrices(gamma);
    let c = Complex64::new(scale, 0.);
    let mut best = 0;
    let mut best_metric = f64::INFINITY;
    for k in 0..n {
        let x = codebook.codeword(k);
        let residual = &whiten * (y - (&x * h) * c);
        let metric: f64 = residual.iter().map(|v| v.norm_sqr()).sum();
        if metric < best_metric {
            best_metric = metric;
            best = k;
        }
    }
    Ok(best)
}

/// Full ML decoding for the synchronous two-phase chain.
pub fn ml_decode_full(
    y: &CVector,
    codebook: &StbcCodebook,
    channel: &ChannelRealization,
    config: &RelayNetworkConfig,
) -> Result<usize, RelayError> {
    let gamma = noise_covariance(config, channel);
    let h = compound_channel(config, channel);
    ml_decode_full_with(y, codebook, &h, &gamma.gamma, config.closed_form_factor())
}

/// Whitened separability: every cross-group pair of weights must satisfy
/// `A_i^H Gamma^{-1} A_j + A_j^H Gamma^{-1} A_i = 0`.
pub fn check_multigroup_condition(design: &LinearSpaceTimeDesign, gamma: &CMatrix) -> bool {
    multigroup_violation(design, gamma).is_none()
}

fn multigroup_violation(
    design: &LinearSpaceTimeDesign,
    gamma: &CMatrix,
) -> Option<(usize, usize, f64)> {
    let (inv, _) = whitening_matrices(gamma);
    let partition = design.partition();
    for a in 0..partition.len() {
        for b in a + 1..partition.len() {
            for &i in &partition[a] {
                for &j in &partition[b] {
                    let ai = design.weight(i);
                    let aj = design.weight(j);
                    let cross = ai.adjoint() * &inv * aj + aj.adjoint() * &inv * ai;
                    let residual = crate::design::max_abs_entry(&cross);
                    if residual > MULTIGROUP_TOL {
                        return Some((a, b, residual));
                    }
                }
            }
        }
    }
    None
}

/// Independent per-group ML decoding against an explicit equivalent channel
/// and noise covariance. Returns the chosen point index for every group;
/// fails when the separability condition does not hold for this covariance.
pub fn ml_decode_groups_with(
    y: &CVector,
    codebook: &StbcCodebook,
    h: &CVector,
    gamma: &CMatrix,
    scale: f64,
) -> Result<Vec<usize>, RelayError> {
    let design = codebook.design();
    if let Some((i, j, residual)) = multigroup_violation(design, gamma) {
        return Err(RelayError::ConditionViolated { i, j, residual });
    }
    let (inv, _) = whitening_matrices(gamma);
    let c = scale;
    let y_inv = y.adjoint() * &inv;
    let mut choices = Vec::with_capacity(codebook.group_sets().len());
    for (g, set) in codebook.group_sets().iter().enumerate() {
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for (p, point) in set.points().iter().enumerate() {
            let s = design.group_matrix_at(g, point);
            let sh = &s * h;
            let quad = (sh.adjoint() * &inv * &sh)[(0, 0)].re;
            let cross = (&y_inv * &sh)[(0, 0)].re;
            let metric = c * c * quad - 2.0 * c * cross;
            if metric < best_metric {
                best_metric = metric;
                best = p;
            }
        }
        choices.push(best);
    }
    Ok(choices)
}

/// Independent per-group ML decoding for the synchronous two-phase chain.
pub fn ml_decode_groups(
    y: &CVector,
    codebook: &StbcCodebook,
    channel: &ChannelRealization,
    config: &RelayNetworkConfig,
) -> Result<Vec<usize>, RelayError> {
    let gamma = noise_covariance(config, channel);
    let h = compound_channel(config, channel);
    ml_decode_groups_with(y, codebook, &h, &gamma.gamma, config.closed_form_factor())
}
