use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bits::mask;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

pub type Gate2 = [[C64; 2]; 2];

const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrix for an axis.
pub fn pauli(axis: Axis) -> Gate2 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match axis {
        Axis::X => [[o, l], [l, o]],
        Axis::Y => [[o, -I], [I, o]],
        Axis::Z => [[l, o], [o, -l]],
    }
}

/// `exp(-i angle sigma/2)`.
pub fn rotation_gate(axis: Axis, angle: f64) -> Gate2 {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    let p = pauli(axis);
    let mut g = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { c } else { C64::new(0.0, 0.0) };
            g[r][k] = id - I * s * p[r][k];
        }
    }
    g
}

/// Apply `g` to qubit `q` of every column of a column-major buffer with
/// `dim` rows.
pub(crate) fn apply_local(data: &mut [C64], dim: usize, n: usize, q: usize, g: &Gate2) {
    let m = mask(n, q);
    for col in data.chunks_exact_mut(dim) {
        for b in 0..dim {
            if b & m == 0 {
                let a0 = col[b];
                let a1 = col[b | m];
                col[b] = g[0][0] * a0 + g[0][1] * a1;
                col[b | m] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }
}

pub(crate) fn apply_all_vec(v: &mut DVector<C64>, n: usize, g: &Gate2) {
    let dim = v.len();
    for q in 0..n {
        apply_local(v.as_mut_slice(), dim, n, q, g);
    }
}

/// `rho -> G rho G^dagger` with `G` the tensor power of `g`.
pub(crate) fn conjugate_all(rho: &mut DMatrix<C64>, n: usize, g: &Gate2) {
    let dim = rho.nrows();
    for q in 0..n {
        apply_local(rho.as_mut_slice(), dim, n, q, g);
    }
    rho.adjoint_mut();
    for q in 0..n {
        apply_local(rho.as_mut_slice(), dim, n, q, g);
    }
    rho.adjoint_mut();
}

/// `J_axis v` without forming the matrix.
pub fn apply_collective(axis: Axis, n: usize, v: &[C64]) -> Vec<C64> {
    let dim = v.len();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for q in 0..n {
        let m = mask(n, q);
        for b in 0..dim {
            let up = b & m == 0;
            out[b] += match axis {
                Axis::X => 0.5 * v[b ^ m],
                // sigma_y |1> = -i |0>, sigma_y |0> = i |1>
                Axis::Y => {
                    if up {
                        -0.5 * I * v[b | m]
                    } else {
                        0.5 * I * v[b & !m]
                    }
                }
                Axis::Z => {
                    if up {
                        0.5 * v[b]
                    } else {
                        -0.5 * v[b]
                    }
                }
            };
        }
    }
    out
}

/// Dense `J_axis = sum_i sigma_axis^i / 2`.
pub fn collective_operator(axis: Axis, n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut j = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[c] = C64::new(1.0, 0.0);
        let col = apply_collective(axis, n, &e);
        for (r, x) in col.into_iter().enumerate() {
            j[(r, c)] = x;
        }
    }
    j
}

/// Dense single-spin operator `sigma_axis` acting on spin `q`.
pub fn local_pauli(axis: Axis, n: usize, q: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::identity(dim, dim);
    apply_local(m.as_mut_slice(), dim, n, q, &pauli(axis));
    m
}
