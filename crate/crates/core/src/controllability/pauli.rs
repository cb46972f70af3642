use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::C64;

const I_POW: [C64; 4] = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 1.0 },
    C64 { re: -1.0, im: 0.0 },
    C64 { re: 0.0, im: -1.0 },
];

/// Phase of `P_{k xor x, k}` for the Pauli string `i^|x&z| X^x Z^z`.
fn phase(x: usize, z: usize, k: usize) -> C64 {
    let p = I_POW[(x & z).count_ones() as usize % 4];
    if (z & k).count_ones() % 2 == 0 {
        p
    } else {
        -p
    }
}

/// Pauli string with coefficient index `x * 2^n + z`, where bit `n-1-q` of
/// the masks acts on spin `q` (`x` only: X, `z` only: Z, both: Y).
pub fn pauli_string(n: usize, index: usize) -> DMatrix<C64> {
    let d = 1usize << n;
    let (x, z) = (index / d, index % d);
    let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for k in 0..d {
        m[(k ^ x, k)] = phase(x, z, k);
    }
    m
}

pub fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    let scale = m.iter().map(|x| x.norm()).fold(1.0, f64::max);
    m.is_square() && (m - m.adjoint()).iter().all(|x| x.norm() <= tol * scale)
}

/// Real coefficients `c_P = Tr(P M) / 2^n` of a Hermitian matrix.
pub fn pauli_coefficients(m: &DMatrix<C64>, n: usize) -> Result<DVector<f64>> {
    let d = 1usize << n;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
    }
    if !is_hermitian(m, 1e-12) {
        return invalid("generator is not Hermitian");
    }
    Ok(DVector::from_fn(d * d, |idx, _| {
        let (x, z) = (idx / d, idx % d);
        let tr: C64 = (0..d).map(|k| phase(x, z, k) * m[(k, k ^ x)]).sum();
        tr.re / d as f64
    }))
}

/// `sum_P c_P P`.
pub fn pauli_matrix(coefficients: &DVector<f64>, n: usize) -> DMatrix<C64> {
    let d = 1usize << n;
    let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for (idx, &c) in coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (x, z) = (idx / d, idx % d);
        for k in 0..d {
            m[(k ^ x, k)] += phase(x, z, k) * c;
        }
    }
    m
}
