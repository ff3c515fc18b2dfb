//! Named space-time code constructions.
//!
//! Everything here emits a [`LinearSpaceTimeDesign`] with its decoding
//! partition already attached:
//!
//! * [`construct_max_rate_cuwd`] builds the rate-optimal Clifford
//!   unitary-weight design for a given group count, from an anticommuting
//!   generator family and sign-diagonal tensor factors.
//! * [`construct_abba`] places orthogonal-design blocks in an XOR-indexed
//!   block-circulant pattern.
//! * [`construct_tensor_cuwd`] tensors independent sign diagonals of any size
//!   with the generator family, which covers every even number of antennas.
//! * [`construct_pciod`] stacks scaled 2x2 orthogonal blocks on the diagonal,
//!   giving a four-group decodable design for any number of relays.
//! * [`regular_design`] takes the left regular representation of an algebra
//!   `A(2, a)` or `A(3, a)`, yielding conjugate designs with unitary relay
//!   matrices and a four-group partition.
//!
//! A handful of fixed reference designs used by tests and baselines
//! ([`alamouti`], [`golden_code`], [`od_4x4`], [`ciod_4x4`],
//! [`field_extension_code`]) are also provided.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{
    default_column_basis, monomial_product, monomial_repr, AlgebraError, CMatrix,
    ConjugateConvention, Monomial, Signature, SignedMonomial,
};
use crate::design::{DesignError, LinearSpaceTimeDesign};

/// Errors from the constructors.
#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("could not assemble {lambda} linearly independent sign diagonals")]
    NoIndependentDiagonals { lambda: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// [[0, -1], [1, 0]], a real rotation by 90 degrees.
fn rot90() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)])
}

/// [[0, i], [i, 0]].
fn swap_i() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.)])
}

/// diag(1, -1).
fn sign_diag() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

fn kron_chain(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// A family of `g - 1` pairwise anticommuting unitary matrices of size
/// `2^floor((g-1)/2)`, each squaring to `-I`.
///
/// The first member is `i` times a tensor power of diag(1, -1); the rest
/// alternate a real rotation and an imaginary swap moved one tensor slot at a
/// time. With this sign convention the `g = 4` family is exactly the
/// non-identity weight set of the 2x2 orthogonal design.
pub fn clifford_generator_matrices(g: u32) -> Vec<CMatrix> {
    assert!(g >= 1, "need at least one group");
    let q = ((g - 1) / 2) as usize;
    let eye2 = CMatrix::identity(2, 2);
    let mut out = Vec::with_capacity((g - 1) as usize);
    for t in 1..g {
        let mat = if t == 1 {
            kron_chain(&vec![sign_diag(); q]) * c(0., 1.)
        } else {
            let (k, middle) = if t % 2 == 0 {
                ((t / 2) as usize, rot90())
            } else {
                (((t - 1) / 2) as usize, swap_i())
            };
            let mut factors = vec![eye2.clone(); q - k];
            factors.push(middle);
            factors.extend(vec![sign_diag(); k - 1]);
            kron_chain(&factors)
        };
        out.push(mat);
    }
    out
}

/// Diagonal sign patterns `(-1)^popcount(i & c)`: entry `c` of pattern `i`.
/// These are the rows of the Sylvester Hadamard matrix, so any prefix of them
/// is linearly independent and pattern 0 is all ones.
fn walsh_pattern(i: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|col| if (i & col).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// The maximum-rate Clifford unitary-weight design with `2^a` symbols per
/// group and `g` groups: a square design of size `2^a * 2^floor((g-1)/2)`
/// with `2^a * g` real symbols and rate `g / 2^floor((g-1)/2)`.
///
/// Cell `(i, j)` of the weight array is the product of the i-th sign-diagonal
/// tensor pattern and the j-th first-row matrix; groups are the columns.
pub fn construct_max_rate_cuwd(a: u32, g: u32) -> LinearSpaceTimeDesign {
    assert!(a <= 8, "sign-diagonal tensor depth too large");
    let lambda = 1usize << a;
    let diagonals: Vec<Vec<f64>> = (0..lambda).map(|i| walsh_pattern(i, lambda)).collect();
    assemble_cuwd(&diagonals, g)
}

/// Clifford unitary-weight design from `lambda` independent sign diagonals
/// tensored with the generator family: size `lambda * 2^floor((g-1)/2)`,
/// `lambda * g` real symbols. `lambda = 1` reduces to the orthogonal design
/// of the generator family alone; powers of two reproduce
/// [`construct_max_rate_cuwd`]; other values take a greedy independent set of
/// sign patterns.
pub fn construct_tensor_cuwd(lambda: usize, g: u32) -> Result<LinearSpaceTimeDesign, ConstructError> {
    if lambda == 0 {
        return Err(ConstructError::Unsupported("lambda must be positive".into()));
    }
    let diagonals = independent_sign_diagonals(lambda)?;
    Ok(assemble_cuwd(&diagonals, g))
}

fn independent_sign_diagonals(lambda: usize) -> Result<Vec<Vec<f64>>, ConstructError> {
    if lambda.is_power_of_two() {
        return Ok((0..lambda).map(|i| walsh_pattern(i, lambda)).collect());
    }
    if lambda > 16 {
        return Err(ConstructError::Unsupported(
            "sign-diagonal search limited to lambda <= 16".into(),
        ));
    }
    // Greedy scan over +/-1 vectors with leading +1, keeping each candidate
    // that grows the rank, starting from the all-ones vector.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(lambda);
    for code in 0u64..(1u64 << (lambda - 1)) {
        let mut v = vec![1.0; lambda];
        for p in 1..lambda {
            if (code >> (p - 1)) & 1 == 1 {
                v[p] = -1.0;
            }
        }
        let mut trial = rows.clone();
        trial.push(v.clone());
        let m = DMatrix::<f64>::from_fn(trial.len(), lambda, |r, cidx| trial[r][cidx]);
        if m.rank(1e-9) == trial.len() {
            rows.push(v);
        }
        if rows.len() == lambda {
            return Ok(rows);
        }
    }
    Err(ConstructError::NoIndependentDiagonals { lambda })
}

fn assemble_cuwd(diagonals: &[Vec<f64>], g: u32) -> LinearSpaceTimeDesign {
    let lambda = diagonals.len();
    let gens = clifford_generator_matrices(g);
    let m = gens.first().map_or(1, |mat| mat.nrows());
    let n_t = lambda * m;
    let eye_lambda = CMatrix::identity(lambda, lambda);
    let eye_m = CMatrix::identity(m, m);

    let mut first_row = Vec::with_capacity(g as usize);
    first_row.push(CMatrix::identity(n_t, n_t));
    for gen in &gens {
        first_row.push(eye_lambda.kronecker(gen));
    }
    let first_col: Vec<CMatrix> = diagonals
        .iter()
        .map(|d| {
            let dm = CMatrix::from_fn(lambda, lambda, |r, cidx| {
                if r == cidx {
                    c(d[r], 0.)
                } else {
                    c(0., 0.)
                }
            });
            dm.kronecker(&eye_m)
        })
        .collect();

    let mut weights = Vec::with_capacity(lambda * g as usize);
    let mut partition = Vec::with_capacity(g as usize);
    for row_mat in &first_row {
        let mut group = Vec::with_capacity(lambda);
        for col_mat in &first_col {
            group.push(weights.len());
            weights.push(col_mat * row_mat);
        }
        partition.push(group);
    }
    LinearSpaceTimeDesign::new(n_t, n_t, weights, partition)
        .expect("cuwd assembly emits consistent shapes")
}

/// Block-circulant design with XOR block indexing: block `(r, m)` of the
/// `L x L` array holds the orthogonal-design block of index `r XOR m`, where
/// `L = 2^a`. Each block is linear in `1` and `n` anticommuting generators;
/// for `n = 2` the product of the two generators is included as well, making
/// each block a full 2x2 orthogonal design in four real symbols.
///
/// The default partition groups symbols by their in-block position across all
/// blocks, which gives the finest metric split this structure supports. The
/// coarser two-group split is available from [`abba_coarse_partition`].
pub fn construct_abba(n: u32, a: u32) -> LinearSpaceTimeDesign {
    assert!(n >= 1, "need at least one generator");
    let l = 1usize << a;
    let coeffs = abba_block_coefficients(n);
    let ncoeff = coeffs.len();
    let m = coeffs[0].nrows();
    let t = l * m;

    let mut weights = Vec::with_capacity(l * ncoeff);
    for block in 0..l {
        // Permutation of the block array by XOR with the block index.
        let perm = CMatrix::from_fn(l, l, |r, cidx| {
            if r ^ cidx == block {
                c(1., 0.)
            } else {
                c(0., 0.)
            }
        });
        for coeff in &coeffs {
            weights.push(perm.kronecker(coeff));
        }
    }
    let partition: Vec<Vec<usize>> = (0..ncoeff)
        .map(|j| (0..l).map(|i| i * ncoeff + j).collect())
        .collect();
    LinearSpaceTimeDesign::new(t, t, weights, partition)
        .expect("abba assembly emits consistent shapes")
}

fn abba_block_coefficients(n: u32) -> Vec<CMatrix> {
    let gens = clifford_generator_matrices(n + 1);
    let m = gens.first().map_or(1, |g| g.nrows());
    let mut coeffs = Vec::with_capacity(n as usize + 2);
    coeffs.push(CMatrix::identity(m, m));
    coeffs.extend(gens.iter().cloned());
    if n == 2 {
        coeffs.push(&gens[1] * &gens[0]);
    }
    coeffs
}

/// The two-group partition of the ABBA design for `n = 2`: real and
/// imaginary symbols of the first complex variable of every block in one
/// group, those of the second complex variable in the other.
pub fn abba_coarse_partition(n: u32, a: u32) -> Result<Vec<Vec<usize>>, ConstructError> {
    if n != 2 {
        return Err(ConstructError::Unsupported(
            "coarse pairing is defined for two-generator blocks".into(),
        ));
    }
    let l = 1usize << a;
    let ncoeff = 4;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for i in 0..l {
        first.extend([i * ncoeff, i * ncoeff + 1]);
        second.extend([i * ncoeff + 2, i * ncoeff + 3]);
    }
    Ok(vec![first, second])
}

/// Block-diagonal design of scaled 2x2 orthogonal blocks, four-group
/// decodable for any number of relays.
///
/// For even `R` the design is `R x R` with `2R` real symbols; block `k` is
/// `sqrt(2) * [[x_{4k+1}+ix_{4k+2}, -x_{4k+3}+ix_{4k+4}], [x_{4k+3}+ix_{4k+4},
/// x_{4k+1}-ix_{4k+2}]]`. The scaling gives every relay matrix squared
/// Frobenius norm `T`. For odd `R` the even design one size up is built and
/// its last column dropped, keeping all `2(R+1)` symbols. Groups collect
/// every fourth symbol, giving single-complex-symbol decoding after
/// precoding.
pub fn construct_pciod(r: usize) -> Result<LinearSpaceTimeDesign, ConstructError> {
    if r < 2 {
        return Err(ConstructError::Unsupported(
            "need at least two relays".into(),
        ));
    }
    let r_even = if r % 2 == 0 { r } else { r + 1 };
    let t = r_even;
    let k = 2 * r_even;
    let s = std::f64::consts::SQRT_2;
    let mut weights = vec![CMatrix::zeros(t, r); k];
    // Per-block entry patterns for the four symbols: (row offset, col offset,
    // value) within the 2x2 block.
    let patterns: [&[(usize, usize, Complex64)]; 4] = [
        &[(0, 0, c(1., 0.)), (1, 1, c(1., 0.))],
        &[(0, 0, c(0., 1.)), (1, 1, c(0., -1.))],
        &[(0, 1, c(-1., 0.)), (1, 0, c(1., 0.))],
        &[(0, 1, c(0., 1.)), (1, 0, c(0., 1.))],
    ];
    for blk in 0..r_even / 2 {
        for (sym, pat) in patterns.iter().enumerate() {
            let w = &mut weights[4 * blk + sym];
            for &(dr, dc, v) in *pat {
                let col = 2 * blk + dc;
                if col < r {
                    w[(2 * blk + dr, col)] = v * s;
                }
            }
        }
    }
    let partition: Vec<Vec<usize>> = (0..4)
        .map(|j| (0..r_even / 2).map(|blk| 4 * blk + j).collect())
        .collect();
    Ok(LinearSpaceTimeDesign::new(t, r, weights, partition)?)
}

fn gamma1_free(basis: &[Monomial]) -> bool {
    basis.iter().all(|m| m.gammas & 1 == 0)
}

/// Column basis that reproduces the standard printed form of the regular
/// designs: for `n = 2` the delta states vary fastest, for `n = 3` the gamma
/// part varies fastest.
pub fn regular_design_basis(sig: Signature) -> Result<Vec<Monomial>, ConstructError> {
    match sig.n {
        2 => Ok(default_column_basis(sig)),
        3 => {
            let half = sig.complex_dim();
            let gamma_states = 1usize << (sig.n - 1);
            Ok((0..half)
                .map(|j| Monomial {
                    gammas: ((j % gamma_states) as u32) << 1,
                    deltas: (j / gamma_states) as u32,
                })
                .collect())
        }
        _ => Err(ConstructError::Unsupported(
            "regular designs are built from algebras with 2 or 3 gamma generators".into(),
        )),
    }
}

/// Four-group decodable conjugate design from the left regular representation
/// of `A(n, a)` with `n` equal to 2 or 3: a square design of size `2^(n+a-1)`
/// in as many complex symbols, so rate 1 dpcu. All relay matrices of these
/// designs are unitary and the weight matrices split into four groups.
pub fn regular_design(sig: Signature) -> Result<LinearSpaceTimeDesign, ConstructError> {
    let basis = regular_design_basis(sig)?;
    regular_design_with_basis(sig, &basis)
}

/// Same as [`regular_design`] with an explicit column basis. The basis
/// monomials must avoid `gamma_1`, since the four-group partition is read off
/// the `gamma` content of each basis element.
pub fn regular_design_with_basis(
    sig: Signature,
    basis: &[Monomial],
) -> Result<LinearSpaceTimeDesign, ConstructError> {
    if sig.n != 2 && sig.n != 3 {
        return Err(ConstructError::Unsupported(
            "regular designs are built from algebras with 2 or 3 gamma generators".into(),
        ));
    }
    if !gamma1_free(basis) {
        return Err(ConstructError::Unsupported(
            "column basis for a regular design must avoid gamma_1".into(),
        ));
    }
    let conv = ConjugateConvention::default();
    let gamma1 = SignedMonomial::positive(Monomial::gamma(1));
    let half = sig.complex_dim();
    let mut weights = Vec::with_capacity(2 * half);
    for &m in basis {
        let real_part = monomial_repr(SignedMonomial::positive(m), sig, basis, conv)?;
        let imag_mono = monomial_product(SignedMonomial::positive(m), gamma1, sig)?;
        let imag_part = monomial_repr(imag_mono, sig, basis, conv)?;
        weights.push(real_part);
        weights.push(imag_part);
    }
    let partition = four_group_partition(sig, basis);
    Ok(LinearSpaceTimeDesign::new(half, half, weights, partition)?)
}

/// Groups weight indices by the gamma content of their basis monomial and
/// quadrature. For `n = 3` the central element `gamma_1 gamma_2 gamma_3`
/// squares to +1, so classes related by complementing the gamma part and
/// flipping quadrature merge.
fn four_group_partition(sig: Signature, basis: &[Monomial]) -> Vec<Vec<usize>> {
    let full_gamma_mask = ((1u32 << sig.n) - 1) & !1;
    let mut keys: Vec<(u32, u32)> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (j, m) in basis.iter().enumerate() {
        for e in 0..2u32 {
            let mut key = (m.gammas, e);
            if sig.n == 3 {
                let partner = (m.gammas ^ full_gamma_mask, 1 - e);
                key = key.min(partner);
            }
            let gid = match keys.iter().position(|&k| k == key) {
                Some(p) => p,
                None => {
                    keys.push(key);
                    groups.push(Vec::new());
                    keys.len() - 1
                }
            };
            groups[gid].push(2 * j + e as usize);
        }
    }
    debug_assert_eq!(groups.len(), 4);
    groups
}

/// The 2x2 orthogonal design in four real symbols, one group per symbol.
pub fn alamouti() -> LinearSpaceTimeDesign {
    construct_max_rate_cuwd(0, 4)
        .with_partition(vec![vec![0], vec![1], vec![2], vec![3]])
        .expect("partition covers all four symbols")
}

/// The full-rate, full-diversity 2x2 design over the golden ratio: eight
/// real symbols, jointly decoded (a single group), rate 4 dpcu.
pub fn golden_code() -> LinearSpaceTimeDesign {
    let theta = (1.0 + 5.0f64.sqrt()) / 2.0;
    let theta_bar = (1.0 - 5.0f64.sqrt()) / 2.0;
    let alpha = c(1.0, 1.0 - theta);
    let alpha_bar = c(1.0, 1.0 - theta_bar);
    let i = c(0., 1.);
    // S(z) for complex z1..z4; every entry is linear in z with no
    // conjugation, so weights follow by evaluating at unit vectors.
    let eval = |z: [Complex64; 4]| -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                alpha * (z[0] + z[1] * theta),
                alpha * (z[2] + z[3] * theta),
                i * alpha_bar * (z[2] + z[3] * theta_bar),
                alpha_bar * (z[0] + z[1] * theta_bar),
            ],
        )
    };
    let mut weights = Vec::with_capacity(8);
    for k in 0..4 {
        for unit in [c(1., 0.), c(0., 1.)] {
            let mut z = [c(0., 0.); 4];
            z[k] = unit;
            weights.push(eval(z));
        }
    }
    LinearSpaceTimeDesign::new(2, 2, weights, vec![(0..8).collect()])
        .expect("golden code weights are 2x2")
}

/// The rate-3/2 orthogonal design for four antennas: six real symbols, all
/// groups singletons.
pub fn od_4x4() -> LinearSpaceTimeDesign {
    let z = c(0., 0.);
    let o = c(1., 0.);
    let i = c(0., 1.);
    #[rustfmt::skip]
    let weights = vec![
        // x1: Re(z1) on the diagonal pattern
        CMatrix::from_row_slice(4, 4, &[
            o, z, z, z,
            z, o, z, z,
            z, z, o, z,
            z, z, z, o,
        ]),
        // x2: Im(z1), conjugated on rows 2 and 3
        CMatrix::from_row_slice(4, 4, &[
            i, z, z, z,
            z, -i, z, z,
            z, z, -i, z,
            z, z, z, i,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, -o, z, z,
            o, z, z, z,
            z, z, z, o,
            z, z, -o, z,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, i, z, z,
            i, z, z, z,
            z, z, z, -i,
            z, z, -i, z,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, z, -o, z,
            z, z, z, -o,
            o, z, z, z,
            z, o, z, z,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, z, i, z,
            z, z, z, i,
            i, z, z, z,
            z, i, z, z,
        ]),
    ];
    LinearSpaceTimeDesign::new(4, 4, weights, (0..6).map(|j| vec![j]).collect())
        .expect("orthogonal design weights are 4x4")
}

/// The coordinate-interleaved design: two 2x2 orthogonal blocks on the
/// diagonal, unnormalized, eight real symbols in singleton groups. Every
/// cross pair of weights separates, but the zero blocks make the weights
/// non-unitary and the design is not fully diverse without precoding.
pub fn ciod_4x4() -> LinearSpaceTimeDesign {
    let normalized = construct_pciod(4).expect("four relays is valid");
    let scale = c(1.0 / std::f64::consts::SQRT_2, 0.);
    let weights = normalized.weights().iter().map(|w| w * scale).collect();
    LinearSpaceTimeDesign::new(4, 4, weights, (0..8).map(|j| vec![j]).collect())
        .expect("ciod weights are 4x4")
}

/// Rate-one circulant design over a quartic field extension: four complex
/// symbols, fully joint decoding. Serves as a full-ML baseline with no group
/// structure.
pub fn field_extension_code() -> LinearSpaceTimeDesign {
    let i = c(0., 1.);
    let one = c(1., 0.);
    // S[r][col] = z_{r-col mod 4}, scaled by i above the diagonal.
    let eval = |z: [Complex64; 4]| -> CMatrix {
        CMatrix::from_fn(4, 4, |r, col| {
            let idx = (4 + r - col) % 4;
            let twist = if col > r { i } else { one };
            twist * z[idx]
        })
    };
    let mut weights = Vec::with_capacity(8);
    for k in 0..4 {
        for unit in [one, i] {
            let mut z = [c(0., 0.); 4];
            z[k] = unit;
            weights.push(eval(z));
        }
    }
    LinearSpaceTimeDesign::new(4, 4, weights, vec![(0..8).collect()])
        .expect("circulant weights are 4x4")
}
