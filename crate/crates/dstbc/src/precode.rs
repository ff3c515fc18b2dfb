//! Full-diversity signal-set machinery: joint diagonalization of commuting
//! weight groups, product-distance evaluation, rotated and lattice
//! constellations, coding gain, and exhaustive full-diversity checks.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::CMatrix;
use crate::design::{DesignError, LinearSpaceTimeDesign};

/// Eigenvalues within this distance of +/-1 snap to exact signs; a mix of
/// snappable and non-snappable entries is rejected as ambiguous.
pub const SNAP_TOL: f64 = 1e-6;

/// Relative singular-value threshold for full-rank decisions on codeword
/// differences.
pub const DIVERSITY_RANK_TOL: f64 = 1e-9;

/// Default cap on enumerated codeword pairs before switching to sampling.
pub const DEFAULT_PAIR_CAP: usize = 1_000_000;

/// Rotation (degrees) used for the paired symbols of the block-diagonal
/// four-group designs.
pub const PCIOD_ROTATION_DEG: f64 = 31.718;

/// Rotation (degrees) used for the paired symbols of the regular conjugate
/// designs.
pub const REGULAR_DESIGN_ROTATION_DEG: f64 = 166.71;

#[derive(Debug, Error)]
pub enum PrecodeError {
    #[error("need at least one matrix")]
    EmptyInput,
    #[error("matrix {index} is {rows}x{cols}, expected square of size {expected}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix {index} is not Hermitian")]
    NotHermitian { index: usize },
    #[error("matrices {i} and {j} do not commute (residual {residual:.3e})")]
    NotCommuting { i: usize, j: usize, residual: f64 },
    #[error("eigenvalue {value} is near +/-1 but the family has entries that are not; refusing to snap")]
    AmbiguousSnap { value: f64 },
    #[error("signal set dimension {expected} does not match point of length {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("design has {expected} groups but {got} signal sets were given")]
    GroupCountMismatch { expected: usize, got: usize },
    #[error("signal set contains duplicate points (indices {i} and {j})")]
    DuplicatePoints { i: usize, j: usize },
    #[error("generator matrix is singular")]
    SingularGenerator,
    #[error("group {group} expects points of dimension {expected}, signal set has dimension {got}")]
    GroupSetMismatch {
        group: usize,
        expected: usize,
        got: usize,
    },
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("no default lattice generator for dimension {dim}")]
    UnsupportedDimension { dim: usize },
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// A finite set of real vectors used as the alphabet of one decoding group.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    label: String,
}

impl SignalSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, label: String) -> Result<Self, PrecodeError> {
        for p in &points {
            if p.len() != dim {
                return Err(PrecodeError::PointDimension {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d2: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                if d2 <= 1e-24 {
                    return Err(PrecodeError::DuplicatePoints { i, j });
                }
            }
        }
        Ok(Self { dim, points, label })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn average_energy(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum();
        total / self.points.len() as f64
    }

    /// Rescale so the average squared norm of the points equals `target`.
    pub fn normalized_to_energy(mut self, target: f64) -> Self {
        let e = self.average_energy();
        if e > 0.0 {
            let s = (target / e).sqrt();
            for p in &mut self.points {
                for v in p {
                    *v *= s;
                }
            }
        }
        self
    }
}

/// Output of [`joint_diagonalize`]: a unitary `U` with `U A_i U^H = D_i`
/// diagonal, the real diagonals, and the matrix `P` whose columns are those
/// diagonals. `snapped` records whether every diagonal entry was rounded to
/// an exact sign.
#[derive(Clone, Debug)]
pub struct DiagonalizationResult {
    pub u: CMatrix,
    pub diagonals: Vec<Vec<f64>>,
    pub p: DMatrix<f64>,
    pub snapped: bool,
}

const COMMUTE_TOL: f64 = 1e-10;
const DIAG_RESIDUAL_TOL: f64 = 1e-10;

/// Simultaneously diagonalize a family of commuting Hermitian matrices by
/// recursive eigenspace splitting: each matrix in turn refines the current
/// subspace blocks, sub-blocks ordered by descending eigenvalue. When all
/// resulting eigenvalues lie within [`SNAP_TOL`] of +/-1 they are rounded;
/// otherwise the raw values are kept (the block-diagonal designs have
/// non-unitary group matrices whose eigenvalues are not signs).
pub fn joint_diagonalize(matrices: &[CMatrix]) -> Result<DiagonalizationResult, PrecodeError> {
    let first = matrices.first().ok_or(PrecodeError::EmptyInput)?;
    let t = first.nrows();
    for (index, m) in matrices.iter().enumerate() {
        if m.nrows() != t || m.ncols() != t {
            return Err(PrecodeError::ShapeMismatch {
                index,
                rows: m.nrows(),
                cols: m.ncols(),
                expected: t,
            });
        }
        if crate::design::max_abs_entry(&(m - m.adjoint())) > COMMUTE_TOL {
            return Err(PrecodeError::NotHermitian { index });
        }
    }
    for i in 0..matrices.len() {
        for j in i + 1..matrices.len() {
            let residual =
                crate::design::max_abs_entry(&(&matrices[i] * &matrices[j] - &matrices[j] * &matrices[i]));
            if residual > COMMUTE_TOL {
                return Err(PrecodeError::NotCommuting { i, j, residual });
            }
        }
    }

    let mut blocks: Vec<CMatrix> = vec![CMatrix::identity(t, t)];
    for m in matrices {
        let mut next = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let k = b.ncols();
            if k == 1 {
                next.push(b.clone());
                continue;
            }
            let sub = b.adjoint() * m * b;
            let eig = SymmetricEigen::new(sub);
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&p, &q| {
                eig.eigenvalues[q]
                    .partial_cmp(&eig.eigenvalues[p])
                    .expect("eigenvalues are finite")
            });
            let mut start = 0;
            while start < k {
                let mut end = start + 1;
                while end < k
                    && (eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]]).abs()
                        <= SNAP_TOL
                {
                    end += 1;
                }
                let mut cluster = CMatrix::zeros(t, end - start);
                for (out_col, &src) in order[start..end].iter().enumerate() {
                    let v = b * eig.eigenvectors.column(src);
                    cluster.set_column(out_col, &v);
                }
                next.push(cluster);
                start = end;
            }
        }
        blocks = next;
    }

    let mut basis = CMatrix::zeros(t, t);
    let mut col = 0;
    for b in &blocks {
        for c in 0..b.ncols() {
            basis.set_column(col, &b.column(c));
            col += 1;
        }
    }
    let u = basis.adjoint();

    let mut diagonals = Vec::with_capacity(matrices.len());
    for m in matrices {
        let d = &u * m * u.adjoint();
        let mut diag = Vec::with_capacity(t);
        for r in 0..t {
            for c in 0..t {
                if r != c && d[(r, c)].norm() > DIAG_RESIDUAL_TOL {
                    return Err(PrecodeError::NotCommuting {
                        i: 0,
                        j: 0,
                        residual: d[(r, c)].norm(),
                    });
                }
            }
            diag.push(d[(r, r)].re);
        }
        diagonals.push(diag);
    }

    let near_sign = |v: f64| (v.abs() - 1.0).abs() <= SNAP_TOL;
    let all_signs = diagonals.iter().flatten().all(|&v| near_sign(v));
    let any_sign = diagonals.iter().flatten().any(|&v| near_sign(v));
    let snapped = if all_signs {
        for diag in &mut diagonals {
            for v in diag.iter_mut() {
                *v = v.signum();
            }
        }
        true
    } else if any_sign {
        let offender = diagonals
            .iter()
            .flatten()
            .copied()
            .find(|&v| !near_sign(v))
            .expect("mixed family has a non-sign entry");
        return Err(PrecodeError::AmbiguousSnap { value: offender });
    } else {
        false
    };

    let p = DMatrix::from_fn(t, matrices.len(), |r, c| diagonals[c][r]);
    Ok(DiagonalizationResult {
        u,
        diagonals,
        p,
        snapped,
    })
}

/// Minimum over distinct pairs of the absolute coordinate product of the
/// transformed difference vectors.
pub fn min_product_distance(points: &[Vec<f64>], transform: &DMatrix<f64>) -> f64 {
    assert!(points.len() >= 2, "need at least two points");
    let dim = transform.ncols();
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let diff = DMatrix::from_fn(dim, 1, |r, _| points[i][r] - points[j][r]);
            let v = transform * diff;
            let prod: f64 = (0..dim).map(|r| v[(r, 0)]).product();
            best = best.min(prod.abs());
        }
    }
    best
}

/// The `side^2`-point QAM grid rotated by `angle` (radians) and scaled to
/// unit average energy per point.
pub fn rotated_qam(side: usize, angle: f64) -> SignalSet {
    assert!(side >= 2, "QAM side must be at least 2");
    let (s, c) = angle.sin_cos();
    let mut points = Vec::with_capacity(side * side);
    for a_idx in 0..side {
        for b_idx in 0..side {
            let a = (2 * a_idx) as f64 - (side - 1) as f64;
            let b = (2 * b_idx) as f64 - (side - 1) as f64;
            points.push(vec![c * a - s * b, s * a + c * b]);
        }
    }
    let label = format!(
        "{0}x{0} QAM rotated {1:.4} deg, unit average energy",
        side,
        angle.to_degrees()
    );
    SignalSet::new(2, points, label)
        .expect("rotated grid points are distinct")
        .normalized_to_energy(1.0)
}

/// Signal set `{generator * z}` over the given integer vectors. The points
/// are not renormalized; callers compose scaling or a pattern inverse as
/// needed.
pub fn lattice_signal_set(
    generator: &DMatrix<f64>,
    integer_points: &[Vec<f64>],
) -> Result<SignalSet, PrecodeError> {
    let dim = generator.ncols();
    if generator.nrows() != dim || generator.clone().lu().determinant().abs() < 1e-12 {
        return Err(PrecodeError::SingularGenerator);
    }
    let mut points = Vec::with_capacity(integer_points.len());
    for z in integer_points {
        if z.len() != dim {
            return Err(PrecodeError::PointDimension {
                expected: dim,
                got: z.len(),
            });
        }
        let zv = DMatrix::from_fn(dim, 1, |r, _| z[r]);
        let p = generator * zv;
        points.push((0..dim).map(|r| p[(r, 0)]).collect());
    }
    SignalSet::new(dim, points, format!("lattice points, dim {}", dim))
}

/// All integer vectors with `per_dim` values {0, .., per_dim-1} in each of
/// `dim` coordinates.
pub fn integer_grid(dim: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let total = per_dim.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            v.push((idx % per_dim) as f64);
            idx /= per_dim;
        }
        out.push(v);
    }
    out
}

/// Product-distance-optimized rotation generators per dimension. Dimension 2
/// is the closed-form optimal rotation by atan(2)/2 (about 31.7175 degrees),
/// whose products are (a^2 + ab - b^2)/sqrt(5) on integer inputs and hence
/// never vanish; dimension 3 is a frozen orthogonal matrix found by
/// randomized search with local refinement.
pub fn default_lattice_generator(dim: usize) -> Result<DMatrix<f64>, PrecodeError> {
    match dim {
        1 => Ok(DMatrix::identity(1, 1)),
        2 => {
            let theta = 2.0f64.atan() / 2.0;
            let (s, c) = theta.sin_cos();
            Ok(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
        }
        3 => Ok(DMatrix::from_row_slice(3, 3, &DIM3_GENERATOR)),
        _ => Err(PrecodeError::UnsupportedDimension { dim }),
    }
}

/// Orthogonal 3x3 rotation found offline by maximizing the minimum product
/// distance over integer difference vectors in {-3..3}^3; the frozen matrix
/// achieves 0.142088 on that cube.
const DIM3_GENERATOR: [f64; 9] = [
    -0.327_949_994_852_264_6,
    -0.590_973_830_546_024_6,
    -0.737_020_171_017_156_2,
    0.591_014_196_544_208_6,
    -0.736_982_622_098_312_8,
    0.327_961_635_268_973_04,
    -0.736_987_802_042_613_8,
    -0.328_034_367_612_379_8,
    0.590_967_370_762_162_2,
];

/// A finite code: a design plus one signal set per decoding group. Codeword
/// indices run in mixed radix with group 0 most significant, so
/// lexicographically smaller per-group choices give smaller indices.
#[derive(Clone, Debug)]
pub struct StbcCodebook {
    design: LinearSpaceTimeDesign,
    group_sets: Vec<SignalSet>,
}

impl StbcCodebook {
    pub fn new(
        design: LinearSpaceTimeDesign,
        group_sets: Vec<SignalSet>,
    ) -> Result<Self, PrecodeError> {
        let partition = design.partition();
        if group_sets.len() != partition.len() {
            return Err(PrecodeError::GroupCountMismatch {
                expected: partition.len(),
                got: group_sets.len(),
            });
        }
        for (g, set) in group_sets.iter().enumerate() {
            if set.dim() != partition[g].len() {
                return Err(PrecodeError::GroupSetMismatch {
                    group: g,
                    expected: partition[g].len(),
                    got: set.dim(),
                });
            }
            if set.is_empty() {
                return Err(PrecodeError::EmptyCodebook);
            }
        }
        Ok(Self { design, group_sets })
    }

    pub fn design(&self) -> &LinearSpaceTimeDesign {
        &self.design
    }

    pub fn group_sets(&self) -> &[SignalSet] {
        &self.group_sets
    }

    pub fn codeword_count(&self) -> usize {
        self.group_sets.iter().map(|s| s.len()).product()
    }

    /// Per-group point choices for a codeword index, group 0 most
    /// significant.
    pub fn group_choices(&self, index: usize) -> Vec<usize> {
        let mut choices = vec![0; self.group_sets.len()];
        let mut rem = index;
        for g in (0..self.group_sets.len()).rev() {
            let n = self.group_sets[g].len();
            choices[g] = rem % n;
            rem /= n;
        }
        debug_assert_eq!(rem, 0, "codeword index out of range");
        choices
    }

    /// Inverse of [`StbcCodebook::group_choices`].
    pub fn index_of_choices(&self, choices: &[usize]) -> usize {
        let mut index = 0;
        for (g, &c) in choices.iter().enumerate() {
            index = index * self.group_sets[g].len() + c;
        }
        index
    }

    /// Real symbol vector of a codeword, assembled group by group.
    pub fn symbol_vector(&self, index: usize) -> Vec<f64> {
        let choices = self.group_choices(index);
        self.symbols_from_choices(&choices)
    }

    pub fn symbols_from_choices(&self, choices: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; self.design.k()];
        for (g, &choice) in choices.iter().enumerate() {
            let point = self.group_sets[g].point(choice);
            for (slot, &idx) in self.design.partition()[g].iter().enumerate() {
                x[idx] = point[slot];
            }
        }
        x
    }

    pub fn codeword(&self, index: usize) -> CMatrix {
        self.design.matrix_at(&self.symbol_vector(index))
    }
}

/// Enumerated or sampled pair list over a codebook.
fn candidate_pairs(n: usize, max_pairs: usize) -> (Vec<(usize, usize)>, bool) {
    let total = n * n.saturating_sub(1) / 2;
    if total <= max_pairs {
        let mut pairs = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        (pairs, true)
    } else {
        // Deterministic sampling with a fixed seed so reported values are
        // reproducible across runs and thread counts.
        let mut rng = ChaCha8Rng::seed_from_u64(0x0badc0de5eed);
        let mut pairs = Vec::with_capacity(max_pairs);
        while pairs.len() < max_pairs {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i < j {
                pairs.push((i, j));
            } else if j < i {
                pairs.push((j, i));
            }
        }
        (pairs, false)
    }
}

/// Minimum determinant of the difference Gram matrix over codeword pairs.
#[derive(Clone, Copy, Debug)]
pub struct GainReport {
    pub value: f64,
    /// True when every pair was enumerated; false when sampled up to the cap.
    pub exhaustive: bool,
}

/// Coding gain of the codebook: `min det((C1-C2)^H (C1-C2))` over distinct
/// codeword pairs, exact when the pair count fits under `max_pairs` and
/// sampled with a fixed seed otherwise.
pub fn coding_gain(codebook: &StbcCodebook, max_pairs: usize) -> GainReport {
    let n = codebook.codeword_count();
    assert!(n >= 2, "need at least two codewords");
    let (pairs, exhaustive) = candidate_pairs(n, max_pairs);
    let codewords: Vec<CMatrix> = (0..n).map(|i| codebook.codeword(i)).collect();
    let value = pairs
        .par_iter()
        .map(|&(i, j)| {
            let diff = &codewords[i] - &codewords[j];
            (diff.adjoint() * diff).determinant().re
        })
        .reduce(|| f64::INFINITY, f64::min);
    GainReport { value, exhaustive }
}

/// True when every enumerated codeword difference has full column rank,
/// judged by the relative singular-value threshold
/// [`DIVERSITY_RANK_TOL`].
pub fn check_full_diversity(codebook: &StbcCodebook, max_pairs: usize) -> bool {
    let n = codebook.codeword_count();
    assert!(n >= 2, "need at least two codewords");
    let (pairs, _) = candidate_pairs(n, max_pairs);
    let codewords: Vec<CMatrix> = (0..n).map(|i| codebook.codeword(i)).collect();
    pairs.par_iter().all(|&(i, j)| {
        let diff = &codewords[i] - &codewords[j];
        let svd = diff.clone().svd(false, false);
        let max_sv = svd.singular_values.max();
        let min_sv = svd.singular_values.min();
        min_sv > DIVERSITY_RANK_TOL * max_sv
    })
}
