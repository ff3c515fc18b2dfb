//! Linear space-time designs: matrices that are linear in a set of real
//! symbols, with a partition of those symbols into independently decodable
//! groups.
//!
//! A design transmits `S(x) = sum_i x_i A_i` over `T` channel uses and `N_T`
//! antennas, where the `A_i` are fixed complex weight matrices and the `x_i`
//! are real information symbols. The checks in this module decide whether a
//! given set of weights is linearly independent (so the symbols are
//! recoverable at all), whether a partition of the symbols splits the ML
//! metric into per-group terms, and whether a square design satisfies the
//! Clifford unitary-weight conditions that guarantee group-wise equal
//! determinant spectra.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use thiserror::Error;

use crate::algebra::CMatrix;

/// Tolerance for exact matrix identities. Constructions emit entries drawn
/// from {0, ±1, ±i, ±1±i}, so any honest identity holds far below this.
pub const MATRIX_TOL: f64 = 1e-12;

/// Relative singular-value cutoff for numerical rank decisions.
pub(crate) const RANK_TOL: f64 = 1e-9;

/// Errors from design construction, validation, and parsing.
#[derive(Debug, Error)]
pub enum DesignError {
    #[error("weight {index} is {rows}x{cols}, expected {t}x{n_t}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        t: usize,
        n_t: usize,
    },
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("weight matrices are linearly dependent over the reals")]
    DependentWeights,
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A linear space-time design: `K` complex `T x N_T` weight matrices and a
/// partition of the symbol indices `0..K` into decoding groups.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearSpaceTimeDesign {
    t: usize,
    n_t: usize,
    weights: Vec<CMatrix>,
    partition: Vec<Vec<usize>>,
}

impl LinearSpaceTimeDesign {
    /// Builds a design after checking shapes and that the partition is a
    /// disjoint cover of the symbol indices. Linear independence of the
    /// weights is a separate, more expensive check; see
    /// [`check_linear_independence`] and [`LinearSpaceTimeDesign::validate`].
    pub fn new(
        t: usize,
        n_t: usize,
        weights: Vec<CMatrix>,
        partition: Vec<Vec<usize>>,
    ) -> Result<Self, DesignError> {
        for (index, w) in weights.iter().enumerate() {
            if w.nrows() != t || w.ncols() != n_t {
                return Err(DesignError::ShapeMismatch {
                    index,
                    rows: w.nrows(),
                    cols: w.ncols(),
                    t,
                    n_t,
                });
            }
        }
        let k = weights.len();
        let mut seen = vec![false; k];
        for group in &partition {
            if group.is_empty() {
                return Err(DesignError::BadPartition("empty group".into()));
            }
            for &i in group {
                if i >= k {
                    return Err(DesignError::BadPartition(format!(
                        "index {} out of range for K = {}",
                        i, k
                    )));
                }
                if seen[i] {
                    return Err(DesignError::BadPartition(format!(
                        "index {} appears in two groups",
                        i
                    )));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(DesignError::BadPartition(format!(
                "index {} not covered by any group",
                i
            )));
        }
        Ok(LinearSpaceTimeDesign {
            t,
            n_t,
            weights,
            partition,
        })
    }

    /// Channel uses (rows).
    pub fn t(&self) -> usize {
        self.t
    }

    /// Antennas or relays (columns).
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Number of real symbols.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Number of decoding groups.
    pub fn num_groups(&self) -> usize {
        self.partition.len()
    }

    pub fn weights(&self) -> &[CMatrix] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &CMatrix {
        &self.weights[i]
    }

    /// Symbol indices of each group, 0-based.
    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Replaces the partition, revalidating the cover.
    pub fn with_partition(self, partition: Vec<Vec<usize>>) -> Result<Self, DesignError> {
        LinearSpaceTimeDesign::new(self.t, self.n_t, self.weights, partition)
    }

    /// Evaluates the design at a real symbol vector.
    pub fn matrix_at(&self, x: &[f64]) -> CMatrix {
        assert_eq!(x.len(), self.k(), "symbol vector length mismatch");
        let mut s = CMatrix::zeros(self.t, self.n_t);
        for (xi, w) in x.iter().zip(&self.weights) {
            if *xi != 0.0 {
                s += w * Complex64::new(*xi, 0.0);
            }
        }
        s
    }

    /// Evaluates only one group's portion of the design: the symbols of
    /// `group` are read from `x_group` in group order, all others are zero.
    pub fn group_matrix_at(&self, group: usize, x_group: &[f64]) -> CMatrix {
        let idx = &self.partition[group];
        assert_eq!(x_group.len(), idx.len(), "group symbol length mismatch");
        let mut s = CMatrix::zeros(self.t, self.n_t);
        for (&i, xi) in idx.iter().zip(x_group) {
            if *xi != 0.0 {
                s += &self.weights[i] * Complex64::new(*xi, 0.0);
            }
        }
        s
    }

    /// Full invariant check: shapes and partition are enforced by
    /// construction, so this verifies linear independence of the weights.
    pub fn validate(&self) -> Result<(), DesignError> {
        if check_linear_independence(&self.weights) {
            Ok(())
        } else {
            Err(DesignError::DependentWeights)
        }
    }
}

/// Rate of the design in dimensions per channel use, as an exact rational
/// `K / T`. Errors if the weights are linearly dependent, since `K` then
/// overstates the symbol count.
pub fn rate_dpcu(design: &LinearSpaceTimeDesign) -> Result<Rational64, DesignError> {
    design.validate()?;
    Ok(Rational64::new(design.k() as i64, design.t() as i64))
}

/// Whether the weight matrices are linearly independent over the reals,
/// decided by the rank of the real-vectorized stack.
pub fn check_linear_independence(weights: &[CMatrix]) -> bool {
    if weights.is_empty() {
        return true;
    }
    let rows = weights.len();
    let cols = 2 * weights[0].nrows() * weights[0].ncols();
    let mut stack = DMatrix::<f64>::zeros(rows, cols);
    for (r, w) in weights.iter().enumerate() {
        for (c, z) in w.iter().enumerate() {
            stack[(r, 2 * c)] = z.re;
            stack[(r, 2 * c + 1)] = z.im;
        }
    }
    let scale = stack.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    stack.rank(RANK_TOL * scale) == rows
}

/// Whether the partition splits the ML metric: every cross-group pair of
/// weights must satisfy `A_i^H A_j + A_j^H A_i = 0`.
pub fn check_g_group_decodable(design: &LinearSpaceTimeDesign) -> bool {
    let part = design.partition();
    for (gi, group_i) in part.iter().enumerate() {
        for group_j in part.iter().skip(gi + 1) {
            for &i in group_i {
                for &j in group_j {
                    let a = design.weight(i);
                    let b = design.weight(j);
                    let cross = a.adjoint() * b + b.adjoint() * a;
                    if max_abs_entry(&cross) > MATRIX_TOL {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Outcome of [`check_cuwd`]. When the design passes, `cell_signs` records
/// the sign resolved in the product condition for each cell of the
/// lambda-by-g weight array.
#[derive(Clone, Debug)]
pub struct CuwdReport {
    pub passed: bool,
    /// Description of the first violated condition, if any.
    pub first_violation: Option<String>,
    /// Sign `s` with `A(i,j) = s * A(i,1) * A(1,j)`, indexed `[i][j]`,
    /// 0-based. Populated only up to the first violation.
    pub cell_signs: Vec<Vec<i32>>,
}

impl CuwdReport {
    fn fail(reason: String) -> Self {
        CuwdReport {
            passed: false,
            first_violation: Some(reason),
            cell_signs: Vec::new(),
        }
    }
}

/// Verifies the Clifford unitary-weight conditions on a square design whose
/// partition is arranged in consecutive blocks of equal size lambda, one
/// block per group: the weight at cell `(i, j)` of the lambda-by-g array is
/// `A_{(j-1)lambda+i}` and groups are the columns.
///
/// Checked in order: the partition layout itself, unitarity of every weight,
/// `A_1 = I`, the first row squaring to `-I` and pairwise anticommuting, the
/// first column squaring to `+I` and commuting with the first row and with
/// itself, and finally every interior cell equaling `A_{i1} A_{1j}` up to
/// sign. Either sign is accepted and recorded.
pub fn check_cuwd(design: &LinearSpaceTimeDesign) -> CuwdReport {
    if design.t() != design.n_t() {
        return CuwdReport::fail(format!(
            "design is {}x{}, not square",
            design.t(),
            design.n_t()
        ));
    }
    let g = design.num_groups();
    let k = design.k();
    if k % g != 0 {
        return CuwdReport::fail(format!("K = {} not divisible by g = {}", k, g));
    }
    let lambda = k / g;
    for (j, group) in design.partition().iter().enumerate() {
        let expect: Vec<usize> = (j * lambda..(j + 1) * lambda).collect();
        if *group != expect {
            return CuwdReport::fail(format!(
                "group {} is {:?}, expected the consecutive block {:?}",
                j + 1,
                group.iter().map(|i| i + 1).collect::<Vec<_>>(),
                expect.iter().map(|i| i + 1).collect::<Vec<_>>()
            ));
        }
    }
    let n = design.n_t();
    let eye = CMatrix::identity(n, n);
    // Cell (i, j) in 0-based indexing holds weight j*lambda + i.
    let cell = |i: usize, j: usize| design.weight(j * lambda + i);

    for (idx, w) in design.weights().iter().enumerate() {
        if max_abs_entry(&(w.adjoint() * w - &eye)) > MATRIX_TOL {
            return CuwdReport::fail(format!("weight {} is not unitary", idx + 1));
        }
    }
    if max_abs_entry(&(cell(0, 0) - &eye)) > MATRIX_TOL {
        return CuwdReport::fail("first weight is not the identity".into());
    }
    for j in 1..g {
        let f = cell(0, j);
        if max_abs_entry(&(f * f + &eye)) > MATRIX_TOL {
            return CuwdReport::fail(format!(
                "first-row weight at column {} does not square to -I",
                j + 1
            ));
        }
        for j2 in j + 1..g {
            let f2 = cell(0, j2);
            if max_abs_entry(&(f * f2 + f2 * f)) > MATRIX_TOL {
                return CuwdReport::fail(format!(
                    "first-row weights at columns {} and {} do not anticommute",
                    j + 1,
                    j2 + 1
                ));
            }
        }
    }
    for i in 1..lambda {
        let c = cell(i, 0);
        if max_abs_entry(&(c * c - &eye)) > MATRIX_TOL {
            return CuwdReport::fail(format!(
                "first-column weight at row {} does not square to +I",
                i + 1
            ));
        }
        for j in 1..g {
            let f = cell(0, j);
            if max_abs_entry(&(c * f - f * c)) > MATRIX_TOL {
                return CuwdReport::fail(format!(
                    "first-column weight at row {} does not commute with first-row column {}",
                    i + 1,
                    j + 1
                ));
            }
        }
        for i2 in i + 1..lambda {
            let c2 = cell(i2, 0);
            if max_abs_entry(&(c * c2 - c2 * c)) > MATRIX_TOL {
                return CuwdReport::fail(format!(
                    "first-column weights at rows {} and {} do not commute",
                    i + 1,
                    i2 + 1
                ));
            }
        }
    }
    let mut cell_signs = vec![vec![1i32; g]; lambda];
    for i in 1..lambda {
        for j in 1..g {
            let product = cell(i, 0) * cell(0, j);
            let target = cell(i, j);
            if max_abs_entry(&(target - &product)) <= MATRIX_TOL {
                cell_signs[i][j] = 1;
            } else if max_abs_entry(&(target + &product)) <= MATRIX_TOL {
                cell_signs[i][j] = -1;
            } else {
                return CuwdReport::fail(format!(
                    "cell ({}, {}) is not plus or minus A({},1) * A(1,{})",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    CuwdReport {
        passed: true,
        first_violation: None,
        cell_signs,
    }
}

/// Largest entry modulus of a complex matrix.
pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn fmt_f64(v: f64) -> String {
    // `{}` on f64 prints the shortest string that parses back to the same
    // bits, which is what makes the round trip exact.
    format!("{}", v)
}

fn fmt_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", fmt_f64(z.re), fmt_f64(-z.im))
    } else {
        format!("{}+{}i", fmt_f64(z.re), fmt_f64(z.im))
    }
}

fn parse_complex(token: &str, line: usize) -> Result<Complex64, DesignError> {
    let err = |reason: String| DesignError::Parse { line, reason };
    let body = token
        .strip_suffix('i')
        .ok_or_else(|| err(format!("complex entry '{}' does not end in i", token)))?;
    let bytes = body.as_bytes();
    let mut split = None;
    for p in (1..bytes.len()).rev() {
        let b = bytes[p];
        if (b == b'+' || b == b'-') && !matches!(bytes[p - 1], b'e' | b'E') {
            split = Some(p);
            break;
        }
    }
    let p = split.ok_or_else(|| err(format!("complex entry '{}' has no imaginary part", token)))?;
    let re: f64 = body[..p]
        .parse()
        .map_err(|_| err(format!("bad real part in '{}'", token)))?;
    let im: f64 = body[p..]
        .parse()
        .map_err(|_| err(format!("bad imaginary part in '{}'", token)))?;
    Ok(Complex64::new(re, im))
}

/// Serializes a design to the plain-text exchange format: header lines for
/// `T`, `N`, `K` and the groups (1-based indices), then each weight matrix as
/// `T` rows of `re+imi` entries.
pub fn serialize_design(design: &LinearSpaceTimeDesign) -> String {
    let mut out = String::new();
    writeln!(out, "T {}", design.t()).unwrap();
    writeln!(out, "N {}", design.n_t()).unwrap();
    writeln!(out, "K {}", design.k()).unwrap();
    writeln!(out, "groups {}", design.num_groups()).unwrap();
    for group in design.partition() {
        let ids: Vec<String> = group.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "group {}", ids.join(" ")).unwrap();
    }
    for (i, w) in design.weights().iter().enumerate() {
        writeln!(out, "weight {}", i + 1).unwrap();
        for r in 0..w.nrows() {
            let row: Vec<String> = (0..w.ncols()).map(|c| fmt_complex(w[(r, c)])).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

/// Parses the format written by [`serialize_design`]. The round trip is
/// exact: every floating-point entry is restored bit for bit.
pub fn parse_design(text: &str) -> Result<LinearSpaceTimeDesign, DesignError> {
    let total_lines = text.lines().count();
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let mut next = |what: &str| -> Result<(usize, &str), DesignError> {
        lines
            .next()
            .map(|(n, l)| (n + 1, l.trim()))
            .ok_or_else(|| DesignError::Parse {
                line: total_lines,
                reason: format!("unexpected end of input, expected {}", what),
            })
    };
    let header = |line: usize, text: &str, key: &str| -> Result<usize, DesignError> {
        let rest = text.strip_prefix(key).ok_or_else(|| DesignError::Parse {
            line,
            reason: format!("expected '{} <count>', got '{}'", key, text),
        })?;
        rest.trim().parse().map_err(|_| DesignError::Parse {
            line,
            reason: format!("bad count in '{}'", text),
        })
    };

    let (ln, l) = next("T header")?;
    let t = header(ln, l, "T")?;
    let (ln, l) = next("N header")?;
    let n_t = header(ln, l, "N")?;
    let (ln, l) = next("K header")?;
    let k = header(ln, l, "K")?;
    let (ln, l) = next("groups header")?;
    let g = header(ln, l, "groups")?;

    let mut partition = Vec::with_capacity(g);
    for _ in 0..g {
        let (ln, l) = next("group line")?;
        let rest = l.strip_prefix("group").ok_or_else(|| DesignError::Parse {
            line: ln,
            reason: format!("expected 'group <indices>', got '{}'", l),
        })?;
        let mut ids = Vec::new();
        for tok in rest.split_whitespace() {
            let v: usize = tok.parse().map_err(|_| DesignError::Parse {
                line: ln,
                reason: format!("bad index '{}'", tok),
            })?;
            if v == 0 {
                return Err(DesignError::Parse {
                    line: ln,
                    reason: "group indices are 1-based".into(),
                });
            }
            ids.push(v - 1);
        }
        partition.push(ids);
    }

    let mut weights = Vec::with_capacity(k);
    for wi in 0..k {
        let (ln, l) = next("weight header")?;
        let idx = header(ln, l, "weight")?;
        if idx != wi + 1 {
            return Err(DesignError::Parse {
                line: ln,
                reason: format!("expected 'weight {}', got '{}'", wi + 1, l),
            });
        }
        let mut entries = Vec::with_capacity(t * n_t);
        for _ in 0..t {
            let (ln, l) = next("matrix row")?;
            let row: Vec<&str> = l.split_whitespace().collect();
            if row.len() != n_t {
                return Err(DesignError::Parse {
                    line: ln,
                    reason: format!("row has {} entries, expected {}", row.len(), n_t),
                });
            }
            for tok in row {
                entries.push(parse_complex(tok, ln)?);
            }
        }
        weights.push(CMatrix::from_row_slice(t, n_t, &entries));
    }
    if let Some((ln, l)) = lines.next() {
        return Err(DesignError::Parse {
            line: ln + 1,
            reason: format!("trailing content '{}'", l.trim()),
        });
    }
    LinearSpaceTimeDesign::new(t, n_t, weights, partition)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The 2x2 orthogonal design in four real symbols, weights in symbol
    /// order: I, diag(i, -i), [[0, -1], [1, 0]], [[0, i], [i, 0]].
    fn alamouti() -> LinearSpaceTimeDesign {
        let weights = vec![
            CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
            CMatrix::from_row_slice(2, 2, &[c(0., 1.), c(0., 0.), c(0., 0.), c(0., -1.)]),
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)]),
            CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.)]),
        ];
        LinearSpaceTimeDesign::new(2, 2, weights, vec![vec![0], vec![1], vec![2], vec![3]])
            .unwrap()
    }

    #[test]
    fn alamouti_rate_is_two() {
        assert_eq!(rate_dpcu(&alamouti()).unwrap(), Rational64::new(2, 1));
    }

    #[test]
    fn trivial_design_rate_is_one() {
        let d = LinearSpaceTimeDesign::new(
            1,
            1,
            vec![CMatrix::from_row_slice(1, 1, &[c(1., 0.)])],
            vec![vec![0]],
        )
        .unwrap();
        assert_eq!(rate_dpcu(&d).unwrap(), Rational64::new(1, 1));
    }

    #[test]
    fn dependent_weights_fail_rate() {
        let eye = CMatrix::identity(2, 2);
        let d = LinearSpaceTimeDesign::new(
            2,
            2,
            vec![eye.clone(), eye * c(2., 0.)],
            vec![vec![0], vec![1]],
        )
        .unwrap();
        assert!(matches!(rate_dpcu(&d), Err(DesignError::DependentWeights)));
    }

    #[test]
    fn alamouti_weights_are_independent() {
        assert!(check_linear_independence(alamouti().weights()));
    }

    #[test]
    fn scaled_identity_pair_is_dependent() {
        let eye = CMatrix::identity(2, 2);
        assert!(!check_linear_independence(&[eye.clone(), eye * c(2., 0.)]));
    }

    #[test]
    fn alamouti_is_four_group_decodable() {
        assert!(check_g_group_decodable(&alamouti()));
    }

    #[test]
    fn hermitian_pair_is_not_group_separable() {
        // I and sigma_x have A^H B + B^H A = 2 sigma_x, which is nonzero.
        let eye = CMatrix::identity(2, 2);
        let sx = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let d = LinearSpaceTimeDesign::new(2, 2, vec![eye, sx], vec![vec![0], vec![1]]).unwrap();
        assert!(!check_g_group_decodable(&d));
    }

    #[test]
    fn alamouti_passes_the_unitary_weight_conditions() {
        let report = check_cuwd(&alamouti());
        assert!(report.passed, "violation: {:?}", report.first_violation);
        // lambda = 1: only the trivial first row of cell signs exists.
        assert_eq!(report.cell_signs.len(), 1);
    }

    #[test]
    fn nonunitary_weight_is_reported() {
        let mut d = alamouti();
        let scaled = d.weights[1].clone() * c(2., 0.);
        d.weights[1] = scaled;
        let report = check_cuwd(&d);
        assert!(!report.passed);
        assert!(
            report.first_violation.as_deref().unwrap().contains("unitary"),
            "got {:?}",
            report.first_violation
        );
    }

    #[test]
    fn missing_identity_leading_weight_is_reported() {
        let d = alamouti();
        let weights = vec![
            d.weights[1].clone(),
            d.weights[0].clone(),
            d.weights[2].clone(),
            d.weights[3].clone(),
        ];
        let d2 = LinearSpaceTimeDesign::new(
            2,
            2,
            weights,
            vec![vec![0], vec![1], vec![2], vec![3]],
        )
        .unwrap();
        let report = check_cuwd(&d2);
        assert!(!report.passed);
        assert!(
            report
                .first_violation
                .as_deref()
                .unwrap()
                .contains("identity"),
            "got {:?}",
            report.first_violation
        );
    }

    #[test]
    fn partition_must_cover_every_index() {
        let eye = CMatrix::identity(2, 2);
        let err = LinearSpaceTimeDesign::new(2, 2, vec![eye], vec![]);
        assert!(matches!(err, Err(DesignError::BadPartition(_))));
    }

    #[test]
    fn partition_rejects_duplicates() {
        let eye = CMatrix::identity(2, 2);
        let err = LinearSpaceTimeDesign::new(2, 2, vec![eye], vec![vec![0], vec![0]]);
        assert!(matches!(err, Err(DesignError::BadPartition(_))));
    }

    #[test]
    fn serialization_round_trip_is_bit_exact() {
        // Entries chosen to stress the formatter: negatives, tiny and huge
        // magnitudes, and values with no short decimal form.
        let w1 = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(1.0 / 3.0, -2.5e-17),
                c(-0.0, 1.0),
                c(6.02214076e23, -1.0 / 7.0),
                c(0.1 + 0.2, -3.0),
            ],
        );
        let w2 = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(std::f64::consts::PI, std::f64::consts::E),
                c(-1e-300, 1e300),
                c(2.0, 0.0),
                c(0.0, -0.0),
            ],
        );
        let d = LinearSpaceTimeDesign::new(2, 2, vec![w1, w2], vec![vec![0, 1]]).unwrap();
        let text = serialize_design(&d);
        let back = parse_design(&text).unwrap();
        assert_eq!(back.t(), d.t());
        assert_eq!(back.partition(), d.partition());
        for (a, b) in d.weights().iter().zip(back.weights()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits(), "{} vs {}", x, y);
                assert_eq!(x.im.to_bits(), y.im.to_bits(), "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "T 2\nN 2\nK 1\ngroups 1\ngroup 1\nweight 1\n1+0i\n1+0i 0+0i\n";
        let err = parse_design(text);
        match err {
            Err(DesignError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn parse_rejects_malformed_complex_entries() {
        for bad in ["1+2", "i", "1.5", "1e5i", "++2i"] {
            let r = parse_complex(bad, 1);
            assert!(r.is_err(), "token '{}' should be rejected", bad);
        }
        let ok = parse_complex("-1.5e-3+2E4i", 1).unwrap();
        assert_eq!(ok, c(-1.5e-3, 2e4));
    }
}
