//! Shared test fixtures: a tiny parser that expands design entries written
//! in the usual symbolic notation ("z1", "-z2*", "x1+x2+i(x3+x4)") into
//! weight matrices, so reference designs can be stated in the same form
//! they are normally written.

#![allow(dead_code)]

use dstbc::algebra::CMatrix;
use dstbc::LinearSpaceTimeDesign;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn parse_sum(chars: &[char], pos: &mut usize, mult: Complex64, out: &mut [Complex64]) {
    loop {
        let mut sign = 1.0;
        match chars.get(*pos) {
            Some('+') => *pos += 1,
            Some('-') => {
                sign = -1.0;
                *pos += 1;
            }
            _ => {}
        }
        parse_term(chars, pos, mult * sign, out);
        match chars.get(*pos) {
            Some('+') | Some('-') => continue,
            _ => break,
        }
    }
}

fn parse_term(chars: &[char], pos: &mut usize, mult: Complex64, out: &mut [Complex64]) {
    match chars.get(*pos) {
        Some('0') => *pos += 1,
        Some('i') if chars.get(*pos + 1) == Some(&'(') => {
            *pos += 2;
            parse_sum(chars, pos, mult * I, out);
            assert_eq!(chars.get(*pos), Some(&')'), "unclosed i(...) group");
            *pos += 1;
        }
        Some('i') => {
            *pos += 1;
            parse_var(chars, pos, mult * I, out);
        }
        Some('x') | Some('z') => parse_var(chars, pos, mult, out),
        other => panic!("unexpected token {:?}", other),
    }
}

fn parse_var(chars: &[char], pos: &mut usize, mult: Complex64, out: &mut [Complex64]) {
    let kind = chars[*pos];
    *pos += 1;
    let mut idx = 0usize;
    while let Some(d) = chars.get(*pos).and_then(|ch| ch.to_digit(10)) {
        idx = idx * 10 + d as usize;
        *pos += 1;
    }
    assert!(idx >= 1, "variable index must be 1-based");
    let conj = chars.get(*pos) == Some(&'*');
    if conj {
        *pos += 1;
    }
    match kind {
        // Real variable: one coefficient.
        'x' => {
            assert!(!conj, "real variables have no conjugate");
            out[idx - 1] += mult;
        }
        // Complex variable z_k = x_{2k-1} + i x_{2k}.
        'z' => {
            out[2 * idx - 2] += mult;
            out[2 * idx - 1] += if conj { -mult * I } else { mult * I };
        }
        _ => unreachable!(),
    }
}

/// Expands `t * n` row-major symbolic entries over `k` real variables into
/// the `k` weight matrices they describe.
pub fn printed_weights(t: usize, n: usize, k: usize, entries: &[&str]) -> Vec<CMatrix> {
    assert_eq!(entries.len(), t * n, "entry table shape");
    let mut weights = vec![CMatrix::zeros(t, n); k];
    for (pos, expr) in entries.iter().enumerate() {
        let (r, c) = (pos / n, pos % n);
        let chars: Vec<char> = expr.chars().filter(|ch| !ch.is_whitespace()).collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        let mut p = 0;
        parse_sum(&chars, &mut p, Complex64::new(1.0, 0.0), &mut coeffs);
        assert_eq!(p, chars.len(), "trailing input in '{}'", expr);
        for (w, &co) in weights.iter_mut().zip(coeffs.iter()) {
            w[(r, c)] = co;
        }
    }
    weights
}

/// A constructed design paired with the entry table and grouping it must
/// reproduce exactly.
pub struct ReferenceDesign {
    pub name: &'static str,
    pub design: LinearSpaceTimeDesign,
    pub entries: Vec<&'static str>,
    pub scale: f64,
    pub partition: Vec<Vec<usize>>,
}

impl ReferenceDesign {
    pub fn check(&self) {
        assert_design_matches(&self.design, &self.entries, self.scale, &self.partition, self.name);
    }
}

/// The shipped constructions whose reference forms are pinned entry by entry.
pub fn reference_designs() -> Vec<ReferenceDesign> {
    use dstbc::construct::{
        construct_abba, construct_max_rate_cuwd, construct_pciod, regular_design,
    };
    use dstbc::Signature;

    vec![
        ReferenceDesign {
            name: "rate-2 CUWD",
            design: construct_max_rate_cuwd(1, 4),
            entries: vec![
                "x1+x2+i(x3+x4)", "-x5-x6+i(x7+x8)", "0", "0",
                "x5+x6+i(x7+x8)", "x1+x2-i(x3+x4)", "0", "0",
                "0", "0", "x1-x2+i(x3-x4)", "-x5+x6+i(x7-x8)",
                "0", "0", "x5-x6+i(x7-x8)", "x1-x2-i(x3-x4)",
            ],
            scale: 1.0,
            partition: vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
        },
        ReferenceDesign {
            name: "8x8 two-delta design",
            design: regular_design(Signature::new(2, 2)).unwrap(),
            entries: vec![
                "z1", "z2", "z3", "z4", "-z5*", "-z6*", "-z7*", "-z8*",
                "z2", "z1", "z4", "z3", "-z6*", "-z5*", "-z8*", "-z7*",
                "z3", "z4", "z1", "z2", "-z7*", "-z8*", "-z5*", "-z6*",
                "z4", "z3", "z2", "z1", "-z8*", "-z7*", "-z6*", "-z5*",
                "z5", "z6", "z7", "z8", "z1*", "z2*", "z3*", "z4*",
                "z6", "z5", "z8", "z7", "z2*", "z1*", "z4*", "z3*",
                "z7", "z8", "z5", "z6", "z3*", "z4*", "z1*", "z2*",
                "z8", "z7", "z6", "z5", "z4*", "z3*", "z2*", "z1*",
            ],
            scale: 1.0,
            partition: vec![
                vec![0, 2, 4, 6],
                vec![1, 3, 5, 7],
                vec![8, 10, 12, 14],
                vec![9, 11, 13, 15],
            ],
        },
        ReferenceDesign {
            name: "4x4 three-gamma design",
            design: regular_design(Signature::new(3, 0)).unwrap(),
            entries: vec![
                "z1", "-z2*", "-z3*", "-z4",
                "z2", "z1*", "-z4*", "z3",
                "z3", "z4*", "z1*", "-z2",
                "z4", "-z3*", "z2*", "z1",
            ],
            scale: 1.0,
            partition: vec![vec![0, 7], vec![1, 6], vec![2, 5], vec![3, 4]],
        },
        ReferenceDesign {
            name: "8x8 three-gamma design",
            design: regular_design(Signature::new(3, 1)).unwrap(),
            entries: vec![
                "z1", "-z2*", "-z3*", "-z4", "z5", "-z6*", "-z7*", "-z8",
                "z2", "z1*", "-z4*", "z3", "z6", "z5*", "-z8*", "z7",
                "z3", "z4*", "z1*", "-z2", "z7", "z8*", "z5*", "-z6",
                "z4", "-z3*", "z2*", "z1", "z8", "-z7*", "z6*", "z5",
                "z5", "-z6*", "-z7*", "-z8", "z1", "-z2*", "-z3*", "-z4",
                "z6", "z5*", "-z8*", "z7", "z2", "z1*", "-z4*", "z3",
                "z7", "z8*", "z5*", "-z6", "z3", "z4*", "z1*", "-z2",
                "z8", "-z7*", "z6*", "z5", "z4", "-z3*", "z2*", "z1",
            ],
            scale: 1.0,
            partition: vec![
                vec![0, 7, 8, 15],
                vec![1, 6, 9, 14],
                vec![2, 5, 10, 13],
                vec![3, 4, 11, 12],
            ],
        },
        ReferenceDesign {
            name: "PCIOD for four relays",
            design: construct_pciod(4).unwrap(),
            entries: vec![
                "z1", "-z2*", "0", "0",
                "z2", "z1*", "0", "0",
                "0", "0", "z3", "-z4*",
                "0", "0", "z4", "z3*",
            ],
            scale: std::f64::consts::SQRT_2,
            partition: vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 7]],
        },
        ReferenceDesign {
            name: "4x4 block circulant",
            design: construct_abba(2, 1),
            entries: vec![
                "x1+ix2", "-x3+ix4", "x5+ix6", "-x7+ix8",
                "x3+ix4", "x1-ix2", "x7+ix8", "x5-ix6",
                "x5+ix6", "-x7+ix8", "x1+ix2", "-x3+ix4",
                "x7+ix8", "x5-ix6", "x3+ix4", "x1-ix2",
            ],
            scale: 1.0,
            partition: vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 7]],
        },
    ]
}

pub fn reference_design(name: &str) -> ReferenceDesign {
    reference_designs()
        .into_iter()
        .find(|r| r.name == name)
        .unwrap_or_else(|| panic!("no reference design named '{}'", name))
}

/// Per-relay matrices and conjugation flags of the four-relay PCIOD, stated
/// explicitly.
pub fn pciod_relay_reference() -> (Vec<CMatrix>, Vec<bool>) {
    let s = Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let matrices = vec![
        CMatrix::from_row_slice(4, 4, &[
            s, z, z, z,
            z, s, z, z,
            z, z, z, z,
            z, z, z, z,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, -s, z, z,
            s, z, z, z,
            z, z, z, z,
            z, z, z, z,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, z, z, z,
            z, z, z, z,
            z, z, s, z,
            z, z, z, s,
        ]),
        CMatrix::from_row_slice(4, 4, &[
            z, z, z, z,
            z, z, z, z,
            z, z, z, -s,
            z, z, s, z,
        ]),
    ];
    (matrices, vec![false, true, false, true])
}

/// Entry-exact comparison of a constructed design against its reference
/// entry table (scaled by `scale`) and expected variable grouping.
pub fn assert_design_matches(
    design: &LinearSpaceTimeDesign,
    entries: &[&str],
    scale: f64,
    partition: &[Vec<usize>],
    what: &str,
) {
    let (t, n, k) = (design.t(), design.n_t(), design.k());
    let expected = printed_weights(t, n, k, entries);
    for (i, want) in expected.iter().enumerate() {
        let got = design.weight(i);
        for r in 0..t {
            for c in 0..n {
                assert_eq!(
                    got[(r, c)],
                    want[(r, c)] * scale,
                    "{}: weight {} entry ({}, {})",
                    what,
                    i + 1,
                    r,
                    c
                );
            }
        }
    }
    assert_eq!(design.partition(), partition, "{}: grouping", what);
}
