//! Symbolic arithmetic in real algebras generated by anticommuting roots of
//! -1 and central roots of +1, plus complex matrix representations of their
//! elements.
//!
//! The algebra `A(n, a)` is generated over the reals by `gamma_1..gamma_n`
//! satisfying `gamma_k^2 = -1` and `gamma_k gamma_j = -gamma_j gamma_k`, and
//! by `delta_1..delta_a` satisfying `delta_k^2 = +1` with every `delta_k`
//! central. Squarefree products of generators in canonical order form a real
//! basis of size `2^(n+a)`, so elements are plain coefficient vectors and
//! multiplication reduces to sign bookkeeping on bitmasks.
//!
//! Treating `gamma_1` as the imaginary unit turns `A(n, a)` into a right
//! module over `C = R + R gamma_1`. Left multiplication by a fixed element is
//! right-C-linear, and its matrix in a chosen column basis is the complex
//! representation used to build space-time designs. Columns whose basis
//! monomial anticommutes with `gamma_1` end up carrying conjugated symbols,
//! which is exactly how conjugate-linear designs arise.
//!
//! ```
//! use dstbc::algebra::{AlgebraElement, Monomial, Signature, SignedMonomial};
//! use dstbc::algebra::monomial_product;
//!
//! let sig = Signature::new(2, 0);
//! let g1 = SignedMonomial::positive(Monomial::gamma(1));
//! let g2 = SignedMonomial::positive(Monomial::gamma(2));
//! let p = monomial_product(g2, g1, sig).unwrap();
//! assert_eq!(p.sign, -1); // gamma_2 gamma_1 = -gamma_1 gamma_2
//! ```

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Complex matrix type used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Generator counts of an algebra `A(n, a)`: `n` anticommuting generators
/// squaring to -1 and `a` central generators squaring to +1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Signature {
    /// Number of `gamma` generators.
    pub n: u32,
    /// Number of `delta` generators.
    pub a: u32,
}

impl Signature {
    /// Builds a signature. Generator counts are capped so that bitmask
    /// arithmetic stays within `u32` and basis enumeration stays tractable.
    pub fn new(n: u32, a: u32) -> Self {
        assert!(n + a <= 24, "signature too large: n + a = {}", n + a);
        Signature { n, a }
    }

    /// Real dimension of the algebra, `2^(n+a)`.
    pub fn basis_len(self) -> usize {
        1usize << (self.n + self.a)
    }

    /// Dimension of the algebra viewed as a right module over
    /// `C = R + R gamma_1`. Requires at least one `gamma` generator.
    pub fn complex_dim(self) -> usize {
        assert!(self.n >= 1, "complex structure needs gamma_1");
        self.basis_len() / 2
    }

    /// Whether the monomial only uses generators present in this signature.
    pub fn contains(self, m: Monomial) -> bool {
        (m.gammas >> self.n) == 0 && (m.deltas >> self.a) == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A(n={}, a={})", self.n, self.a)
    }
}

/// Squarefree product of generators in canonical order, encoded as bitmasks.
/// Bit `k-1` of `gammas` stands for `gamma_k`, bit `k-1` of `deltas` for
/// `delta_k`. Canonical order is all `gamma` factors first, then all `delta`
/// factors, each ascending by index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Monomial {
    /// Bitmask of `gamma` factors.
    pub gammas: u32,
    /// Bitmask of `delta` factors.
    pub deltas: u32,
}

impl Monomial {
    /// The empty product, i.e. the multiplicative identity.
    pub const ONE: Monomial = Monomial {
        gammas: 0,
        deltas: 0,
    };

    /// Single generator `gamma_k` (1-based).
    pub fn gamma(k: u32) -> Self {
        assert!(k >= 1, "generator indices are 1-based");
        Monomial {
            gammas: 1 << (k - 1),
            deltas: 0,
        }
    }

    /// Single generator `delta_k` (1-based).
    pub fn delta(k: u32) -> Self {
        assert!(k >= 1, "generator indices are 1-based");
        Monomial {
            gammas: 0,
            deltas: 1 << (k - 1),
        }
    }

    /// Total number of generator factors.
    pub fn degree(self) -> u32 {
        self.gammas.count_ones() + self.deltas.count_ones()
    }

    /// Position of this monomial in the canonical basis enumeration of `sig`:
    /// `gamma` mask in the low bits, `delta` mask in the high bits.
    pub fn index(self, sig: Signature) -> usize {
        debug_assert!(sig.contains(self));
        ((self.deltas as usize) << sig.n) | self.gammas as usize
    }

    /// Inverse of [`Monomial::index`].
    pub fn from_index(i: usize, sig: Signature) -> Self {
        debug_assert!(i < sig.basis_len());
        Monomial {
            gammas: (i as u32) & ((1 << sig.n) - 1),
            deltas: (i as u32) >> sig.n,
        }
    }

    /// Whether this monomial anticommutes with `gamma_1`. Commutation is
    /// decided by the parity of the `gamma` factors other than `gamma_1`
    /// itself; `delta` factors never contribute.
    pub fn anticommutes_with_gamma1(self) -> bool {
        (self.gammas >> 1).count_ones() % 2 == 1
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::ONE {
            return write!(f, "1");
        }
        let mut first = true;
        for k in 0..32 {
            if self.gammas & (1 << k) != 0 {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "g{}", k + 1)?;
                first = false;
            }
        }
        for k in 0..32 {
            if self.deltas & (1 << k) != 0 {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "d{}", k + 1)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// A basis monomial together with a sign. These are the elements of the
/// finite multiplicative group `{± m}` generated by the signed generators.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SignedMonomial {
    pub monomial: Monomial,
    /// Either `+1` or `-1`.
    pub sign: i32,
}

impl SignedMonomial {
    /// Wraps a monomial with sign `+1`.
    pub fn positive(monomial: Monomial) -> Self {
        SignedMonomial { monomial, sign: 1 }
    }

    /// Wraps a monomial with sign `-1`.
    pub fn negative(monomial: Monomial) -> Self {
        SignedMonomial { monomial, sign: -1 }
    }

    /// The identity element `+1`.
    pub fn one() -> Self {
        SignedMonomial::positive(Monomial::ONE)
    }
}

impl fmt::Display for SignedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            write!(f, "-")?;
        }
        write!(f, "{}", self.monomial)
    }
}

/// Errors from algebra arithmetic and representation building.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("signature mismatch: {left} vs {right}")]
    SignatureMismatch { left: Signature, right: Signature },
    #[error("monomial {monomial} does not fit signature {sig}")]
    MonomialOutOfSignature { monomial: Monomial, sig: Signature },
    #[error("column basis invalid for {sig}: {reason}")]
    InvalidColumnBasis { sig: Signature, reason: String },
}

/// Multiplies two signed basis monomials under the generator relations.
///
/// The sign accumulates one factor of -1 per transposition needed to sort the
/// concatenated `gamma` factors, plus one per repeated `gamma` (which
/// squares to -1). Repeated `delta` factors cancel silently since they square
/// to +1, and `delta` factors commute with everything, so the `delta` part is
/// a plain XOR.
pub fn monomial_product(
    x: SignedMonomial,
    y: SignedMonomial,
    sig: Signature,
) -> Result<SignedMonomial, AlgebraError> {
    for m in [x.monomial, y.monomial] {
        if !sig.contains(m) {
            return Err(AlgebraError::MonomialOutOfSignature { monomial: m, sig });
        }
    }
    let a = x.monomial.gammas;
    let c = y.monomial.gammas;
    let mut transpositions = 0u32;
    let mut rest = c;
    while rest != 0 {
        let j = rest.trailing_zeros();
        transpositions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    let squares = (a & c).count_ones();
    let parity = if (transpositions + squares) % 2 == 0 {
        1
    } else {
        -1
    };
    Ok(SignedMonomial {
        monomial: Monomial {
            gammas: a ^ c,
            deltas: x.monomial.deltas ^ y.monomial.deltas,
        },
        sign: x.sign * y.sign * parity,
    })
}

/// Element of `A(n, a)` as a real coefficient vector over the canonical
/// monomial basis.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgebraElement {
    sig: Signature,
    coeffs: Vec<f64>,
}

impl AlgebraElement {
    /// The zero element.
    pub fn zero(sig: Signature) -> Self {
        AlgebraElement {
            sig,
            coeffs: vec![0.0; sig.basis_len()],
        }
    }

    /// The scalar `v * 1`.
    pub fn scalar(sig: Signature, v: f64) -> Self {
        let mut e = AlgebraElement::zero(sig);
        e.coeffs[0] = v;
        e
    }

    /// A single signed monomial as an element.
    pub fn from_monomial(sig: Signature, m: SignedMonomial) -> Result<Self, AlgebraError> {
        if !sig.contains(m.monomial) {
            return Err(AlgebraError::MonomialOutOfSignature {
                monomial: m.monomial,
                sig,
            });
        }
        let mut e = AlgebraElement::zero(sig);
        e.coeffs[m.monomial.index(sig)] = m.sign as f64;
        Ok(e)
    }

    /// Builds an element from explicit `(monomial, coefficient)` terms.
    /// Later terms for the same monomial accumulate.
    pub fn from_terms(
        sig: Signature,
        terms: &[(Monomial, f64)],
    ) -> Result<Self, AlgebraError> {
        let mut e = AlgebraElement::zero(sig);
        for &(m, v) in terms {
            if !sig.contains(m) {
                return Err(AlgebraError::MonomialOutOfSignature { monomial: m, sig });
            }
            e.coeffs[m.index(sig)] += v;
        }
        Ok(e)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Coefficient of a basis monomial.
    pub fn coeff(&self, m: Monomial) -> f64 {
        self.coeffs[m.index(self.sig)]
    }

    pub fn set_coeff(&mut self, m: Monomial, v: f64) {
        let i = m.index(self.sig);
        self.coeffs[i] = v;
    }

    /// Raw coefficient vector in canonical basis order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Iterates over nonzero terms in canonical basis order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        let sig = self.sig;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(move |(i, &v)| (Monomial::from_index(i, sig), v))
    }

    /// Sum of two elements of the same signature.
    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
        if self.sig != other.sig {
            return Err(AlgebraError::SignatureMismatch {
                left: self.sig,
                right: other.sig,
            });
        }
        let mut e = self.clone();
        for (c, o) in e.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(e)
    }

    /// Scales every coefficient.
    pub fn scale(&self, v: f64) -> AlgebraElement {
        let mut e = self.clone();
        for c in e.coeffs.iter_mut() {
            *c *= v;
        }
        e
    }
}

/// Product of two elements, the bilinear extension of [`monomial_product`].
pub fn element_multiply(
    x: &AlgebraElement,
    y: &AlgebraElement,
) -> Result<AlgebraElement, AlgebraError> {
    if x.sig != y.sig {
        return Err(AlgebraError::SignatureMismatch {
            left: x.sig,
            right: y.sig,
        });
    }
    let sig = x.sig;
    let mut out = AlgebraElement::zero(sig);
    for (mx, vx) in x.terms() {
        for (my, vy) in y.terms() {
            let p = monomial_product(
                SignedMonomial::positive(mx),
                SignedMonomial::positive(my),
                sig,
            )
            .expect("terms of a valid element fit its signature");
            out.coeffs[p.monomial.index(sig)] += p.sign as f64 * vx * vy;
        }
    }
    Ok(out)
}

/// All signed basis monomials of `A(n, a)`. This set of `2 * 2^(n+a)`
/// elements is closed under [`monomial_product`], contains the identity, and
/// contains an inverse for each element, so it forms a finite group.
pub fn group_elements(sig: Signature) -> Vec<SignedMonomial> {
    let mut out = Vec::with_capacity(2 * sig.basis_len());
    for i in 0..sig.basis_len() {
        let m = Monomial::from_index(i, sig);
        out.push(SignedMonomial::positive(m));
        out.push(SignedMonomial::negative(m));
    }
    out
}

/// Sign convention for the complex structure: whether right multiplication by
/// `gamma_1` is read as `+i` or `-i` on complex coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ConjugateConvention {
    #[default]
    GammaOneIsPlusI,
    GammaOneIsMinusI,
}

/// Canonical column basis for [`left_regular_repr`]: all `gamma_1`-free
/// monomials, enumerated with the mask over `gamma_2..gamma_n` in the high
/// bits and the `delta` mask in the low bits. Pairing each entry `m` with
/// `m gamma_1` recovers the full real basis.
pub fn default_column_basis(sig: Signature) -> Vec<Monomial> {
    assert!(sig.n >= 1, "complex structure needs gamma_1");
    let half = sig.complex_dim();
    let delta_states = 1usize << sig.a;
    let mut out = Vec::with_capacity(half);
    for j in 0..half {
        let gr = (j / delta_states) as u32;
        let dm = (j % delta_states) as u32;
        out.push(Monomial {
            gammas: gr << 1,
            deltas: dm,
        });
    }
    out
}

#[derive(Clone, Copy)]
enum Quadrature {
    Real,
    Imag,
}

/// Matrix of left multiplication by `x` on `A(n, a)`, viewed as a right
/// module over `C = R + R gamma_1` with the given column basis.
///
/// Column `c` holds the complex coordinates of `x * basis_order[c]`. Each
/// listed monomial `m` is paired with `m gamma_1`; together the pairs must
/// span the algebra, otherwise the basis is rejected. The convention decides
/// the sign of the imaginary coordinate.
pub fn left_regular_repr(
    x: &AlgebraElement,
    basis_order: &[Monomial],
    convention: ConjugateConvention,
) -> Result<CMatrix, AlgebraError> {
    let sig = x.signature();
    if sig.n < 1 {
        return Err(AlgebraError::InvalidColumnBasis {
            sig,
            reason: "no gamma generators, so no complex structure".into(),
        });
    }
    let half = sig.complex_dim();
    if basis_order.len() != half {
        return Err(AlgebraError::InvalidColumnBasis {
            sig,
            reason: format!(
                "got {} monomials, need {} to pair into a basis",
                basis_order.len(),
                half
            ),
        });
    }
    let gamma1 = SignedMonomial::positive(Monomial::gamma(1));
    // Coordinate lookup: monomial w maps to (row, quadrature, sign) such that
    // w = sign * m_row (real part) or w = sign * m_row gamma_1 (imag part).
    let mut lookup: HashMap<Monomial, (usize, Quadrature, f64)> =
        HashMap::with_capacity(sig.basis_len());
    for (k, &m) in basis_order.iter().enumerate() {
        if !sig.contains(m) {
            return Err(AlgebraError::MonomialOutOfSignature { monomial: m, sig });
        }
        if lookup.insert(m, (k, Quadrature::Real, 1.0)).is_some() {
            return Err(AlgebraError::InvalidColumnBasis {
                sig,
                reason: format!("monomial {} listed twice", m),
            });
        }
        let partner = monomial_product(SignedMonomial::positive(m), gamma1, sig)?;
        if lookup
            .insert(
                partner.monomial,
                (k, Quadrature::Imag, partner.sign as f64),
            )
            .is_some()
        {
            return Err(AlgebraError::InvalidColumnBasis {
                sig,
                reason: format!(
                    "gamma_1 partner {} of {} collides with another basis entry",
                    partner.monomial, m
                ),
            });
        }
    }
    // Both inserts succeeding for every pair forces exactly 2^(n+a) distinct
    // monomials, so the pairs span the algebra.
    debug_assert_eq!(lookup.len(), sig.basis_len());

    let imag_unit = match convention {
        ConjugateConvention::GammaOneIsPlusI => Complex64::new(0.0, 1.0),
        ConjugateConvention::GammaOneIsMinusI => Complex64::new(0.0, -1.0),
    };
    let mut mat = CMatrix::zeros(half, half);
    for (c, &bm) in basis_order.iter().enumerate() {
        let col_elem = AlgebraElement::from_monomial(sig, SignedMonomial::positive(bm))?;
        let y = element_multiply(x, &col_elem)?;
        for (w, v) in y.terms() {
            let &(row, quad, s) = lookup
                .get(&w)
                .expect("lookup covers every monomial of the signature");
            let contrib = match quad {
                Quadrature::Real => Complex64::new(s * v, 0.0),
                Quadrature::Imag => imag_unit * (s * v),
            };
            mat[(row, c)] += contrib;
        }
    }
    Ok(mat)
}

/// Representation matrix of a single signed monomial, a convenience wrapper
/// around [`left_regular_repr`].
pub fn monomial_repr(
    m: SignedMonomial,
    sig: Signature,
    basis_order: &[Monomial],
    convention: ConjugateConvention,
) -> Result<CMatrix, AlgebraError> {
    let e = AlgebraElement::from_monomial(sig, m)?;
    left_regular_repr(&e, basis_order, convention)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(gammas: &[u32], deltas: &[u32], sign: i32) -> SignedMonomial {
        let mut g = 0u32;
        let mut d = 0u32;
        for &k in gammas {
            g |= 1 << (k - 1);
        }
        for &k in deltas {
            d |= 1 << (k - 1);
        }
        SignedMonomial {
            monomial: Monomial {
                gammas: g,
                deltas: d,
            },
            sign,
        }
    }

    #[test]
    fn gamma_factors_anticommute() {
        let sig = Signature::new(2, 0);
        let g1 = sm(&[1], &[], 1);
        let g2 = sm(&[2], &[], 1);
        assert_eq!(monomial_product(g1, g2, sig).unwrap(), sm(&[1, 2], &[], 1));
        assert_eq!(monomial_product(g2, g1, sig).unwrap(), sm(&[1, 2], &[], -1));
    }

    #[test]
    fn delta_squares_to_plus_one() {
        let sig = Signature::new(0, 1);
        let d1 = sm(&[], &[1], 1);
        assert_eq!(monomial_product(d1, d1, sig).unwrap(), SignedMonomial::one());
    }

    #[test]
    fn delta_gamma_squares_to_minus_one() {
        let sig = Signature::new(1, 1);
        let dg = sm(&[1], &[1], 1);
        assert_eq!(
            monomial_product(dg, dg, sig).unwrap(),
            SignedMonomial::negative(Monomial::ONE)
        );
    }

    #[test]
    fn full_multiplication_table_of_smallest_mixed_algebra() {
        // A(1, 1) with basis order {1, g1, d1, d1 g1}. Entry (i, j) is the
        // product row * column.
        let sig = Signature::new(1, 1);
        let basis = [
            sm(&[], &[], 1),
            sm(&[1], &[], 1),
            sm(&[], &[1], 1),
            sm(&[1], &[1], 1),
        ];
        let one = sm(&[], &[], 1);
        let g1 = sm(&[1], &[], 1);
        let d1 = sm(&[], &[1], 1);
        let dg = sm(&[1], &[1], 1);
        let neg = |m: SignedMonomial| SignedMonomial {
            monomial: m.monomial,
            sign: -m.sign,
        };
        let expected = [
            [one, g1, d1, dg],
            [g1, neg(one), dg, neg(d1)],
            [d1, dg, one, g1],
            [dg, neg(d1), g1, neg(one)],
        ];
        for (i, &x) in basis.iter().enumerate() {
            for (j, &y) in basis.iter().enumerate() {
                assert_eq!(
                    monomial_product(x, y, sig).unwrap(),
                    expected[i][j],
                    "product {} * {}",
                    x,
                    y
                );
            }
        }
    }

    #[test]
    fn binomial_product_with_conjugate_gives_scalar_two() {
        let sig = Signature::new(1, 0);
        let x = AlgebraElement::from_terms(
            sig,
            &[(Monomial::ONE, 1.0), (Monomial::gamma(1), 1.0)],
        )
        .unwrap();
        let y = AlgebraElement::from_terms(
            sig,
            &[(Monomial::ONE, 1.0), (Monomial::gamma(1), -1.0)],
        )
        .unwrap();
        let p = element_multiply(&x, &y).unwrap();
        assert_eq!(p, AlgebraElement::scalar(sig, 2.0));
    }

    #[test]
    fn two_gamma_group_is_the_quaternion_group() {
        let sig = Signature::new(2, 0);
        let g = group_elements(sig);
        assert_eq!(g.len(), 8);
        // i = g1, j = g2, k = g1 g2 satisfy i^2 = j^2 = k^2 = ijk = -1.
        let i = sm(&[1], &[], 1);
        let j = sm(&[2], &[], 1);
        let k = monomial_product(i, j, sig).unwrap();
        let minus_one = SignedMonomial::negative(Monomial::ONE);
        assert_eq!(monomial_product(i, i, sig).unwrap(), minus_one);
        assert_eq!(monomial_product(j, j, sig).unwrap(), minus_one);
        assert_eq!(monomial_product(k, k, sig).unwrap(), minus_one);
        let ijk = monomial_product(monomial_product(i, j, sig).unwrap(), k, sig).unwrap();
        assert_eq!(ijk, minus_one);
    }

    #[test]
    fn signed_monomials_form_a_group() {
        let sig = Signature::new(2, 2);
        let g = group_elements(sig);
        assert_eq!(g.len(), 32);
        // Closure: every pairwise product lands back in the set.
        for &x in &g {
            for &y in &g {
                let p = monomial_product(x, y, sig).unwrap();
                assert!(g.contains(&p), "product {} * {} escaped the set", x, y);
            }
        }
        // Identity and a two-sided inverse for each element.
        let one = SignedMonomial::one();
        assert!(g.contains(&one));
        for &x in &g {
            let inv = g
                .iter()
                .find(|&&y| monomial_product(x, y, sig).unwrap() == one)
                .copied()
                .expect("inverse exists");
            assert_eq!(monomial_product(inv, x, sig).unwrap(), one);
        }
    }

    #[test]
    fn inverse_of_gamma_pair_is_its_negative() {
        let sig = Signature::new(2, 0);
        let g12 = sm(&[1, 2], &[], 1);
        let inv = sm(&[1, 2], &[], -1);
        assert_eq!(monomial_product(g12, inv, sig).unwrap(), SignedMonomial::one());
    }

    #[test]
    fn default_column_basis_orders_gamma_blocks_over_delta_states() {
        let sig = Signature::new(2, 1);
        let basis = default_column_basis(sig);
        let expect = [
            Monomial::ONE,
            Monomial::delta(1),
            Monomial::gamma(2),
            Monomial {
                gammas: 0b10,
                deltas: 0b1,
            },
        ];
        assert_eq!(basis, expect);
    }

    #[test]
    fn repr_of_two_gamma_algebra_is_the_alamouti_family() {
        // A(2, 0) as a right C-module has basis {1, g2}; the four monomials
        // 1, g1, g2, g2 g1 map to the standard 2x2 orthogonal-design weights.
        let sig = Signature::new(2, 0);
        let basis = default_column_basis(sig);
        let conv = ConjugateConvention::default();
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);

        let a1 = monomial_repr(SignedMonomial::one(), sig, &basis, conv).unwrap();
        assert_eq!(a1, CMatrix::from_row_slice(2, 2, &[one, zero, zero, one]));

        let a2 = monomial_repr(
            SignedMonomial::positive(Monomial::gamma(1)),
            sig,
            &basis,
            conv,
        )
        .unwrap();
        assert_eq!(a2, CMatrix::from_row_slice(2, 2, &[i, zero, zero, -i]));

        let a3 = monomial_repr(
            SignedMonomial::positive(Monomial::gamma(2)),
            sig,
            &basis,
            conv,
        )
        .unwrap();
        assert_eq!(a3, CMatrix::from_row_slice(2, 2, &[zero, -one, one, zero]));

        let g2g1 = monomial_product(
            SignedMonomial::positive(Monomial::gamma(2)),
            SignedMonomial::positive(Monomial::gamma(1)),
            sig,
        )
        .unwrap();
        let a4 = monomial_repr(g2g1, sig, &basis, conv).unwrap();
        assert_eq!(a4, CMatrix::from_row_slice(2, 2, &[zero, i, i, zero]));
    }

    #[test]
    fn opposite_convention_conjugates_the_imaginary_unit() {
        let sig = Signature::new(2, 0);
        let basis = default_column_basis(sig);
        let a2 = monomial_repr(
            SignedMonomial::positive(Monomial::gamma(1)),
            sig,
            &basis,
            ConjugateConvention::GammaOneIsMinusI,
        )
        .unwrap();
        assert_eq!(a2[(0, 0)], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn repr_rejects_a_non_spanning_basis() {
        let sig = Signature::new(2, 0);
        // g1 pairs with g1 * g1 = -1, which collides with the pair of 1.
        let bad = [Monomial::ONE, Monomial::gamma(1)];
        let x = AlgebraElement::scalar(sig, 1.0);
        let err = left_regular_repr(&x, &bad, ConjugateConvention::default());
        assert!(matches!(err, Err(AlgebraError::InvalidColumnBasis { .. })));
    }

    #[test]
    fn signature_mismatch_is_reported() {
        let x = AlgebraElement::scalar(Signature::new(1, 0), 1.0);
        let y = AlgebraElement::scalar(Signature::new(2, 0), 1.0);
        assert!(matches!(
            element_multiply(&x, &y),
            Err(AlgebraError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn monomial_outside_signature_is_rejected() {
        let sig = Signature::new(1, 0);
        let g2 = SignedMonomial::positive(Monomial::gamma(2));
        assert!(matches!(
            monomial_product(g2, SignedMonomial::one(), sig),
            Err(AlgebraError::MonomialOutOfSignature { .. })
        ));
    }
}
