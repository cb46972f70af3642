use nalgebra::{DMatrix, DVector};

use super::ops::{apply_all_vec, conjugate_all, rotation_gate, Axis};
use super::state::{QuantumState, StateRepr};
use crate::ensemble::Hamiltonian;
use crate::error::{invalid, Error, Result};
use crate::C64;

/// `exp(-i angle J_axis)` applied to every spin.
pub fn global_rotation(state: &QuantumState, axis: Axis, angle: f64) -> QuantumState {
    let mut out = state.clone();
    rotate_in_place(&mut out, axis, angle);
    out
}

pub(crate) fn rotate_in_place(state: &mut QuantumState, axis: Axis, angle: f64) {
    if angle == 0.0 {
        return;
    }
    let g = rotation_gate(axis, angle);
    let n = state.n_spins();
    match state.repr_mut() {
        StateRepr::Pure(v) => apply_all_vec(v, n, &g),
        StateRepr::Density(r) => conjugate_all(r, n, &g),
    }
}

/// Signal accumulation `exp(-i phi J_y)`.
pub fn ramsey_phase(state: &QuantumState, phi: f64) -> QuantumState {
    global_rotation(state, Axis::Y, phi)
}

/// `exp(-i tau H)` via the cached eigendecomposition.
pub fn interaction_evolution(state: &QuantumState, h: &Hamiltonian, tau: f64) -> Result<QuantumState> {
    let mut out = state.clone();
    evolve_in_place(&mut out, h, tau)?;
    Ok(out)
}

pub(crate) fn evolve_in_place(state: &mut QuantumState, h: &Hamiltonian, tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return invalid(format!("evolution time must be finite and non-negative, got {tau}"));
    }
    if h.n_spins() != state.n_spins() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: state.dim() });
    }
    if tau == 0.0 {
        return Ok(());
    }
    let vecs = h.eigenvectors();
    let phases: Vec<C64> = h.eigenvalues().iter().map(|&e| C64::from_polar(1.0, -e * tau)).collect();
    match state.repr_mut() {
        StateRepr::Pure(psi) => {
            let (re, im) = split_vec(psi);
            let a = vecs.tr_mul(&re);
            let b = vecs.tr_mul(&im);
            let mut re2 = DVector::zeros(a.len());
            let mut im2 = DVector::zeros(a.len());
            for k in 0..a.len() {
                let z = C64::new(a[k], b[k]) * phases[k];
                re2[k] = z.re;
                im2[k] = z.im;
            }
            *psi = join_vec(&(vecs * re2), &(vecs * im2));
        }
        StateRepr::Density(rho) => {
            let mut w = real_sandwich_t(vecs, rho);
            let d = w.nrows();
            for c in 0..d {
                for r in 0..d {
                    w[(r, c)] *= phases[r] * phases[c].conj();
                }
            }
            *rho = real_sandwich(vecs, &w);
        }
    }
    Ok(())
}

fn split_vec(v: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|z| z.re), v.map(|z| z.im))
}

fn join_vec(re: &DVector<f64>, im: &DVector<f64>) -> DVector<C64> {
    DVector::from_fn(re.len(), |k, _| C64::new(re[k], im[k]))
}

pub(crate) fn split_mat(m: &DMatrix<C64>) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub(crate) fn join_mat(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<C64> {
    re.zip_map(im, |a, b| C64::new(a, b))
}

/// `V^T M V` for real `V`.
fn real_sandwich_t(v: &DMatrix<f64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    let (re, im) = split_mat(m);
    join_mat(&(v.tr_mul(&re) * v), &(v.tr_mul(&im) * v))
}

/// `V M V^T` for real `V`.
fn real_sandwich(v: &DMatrix<f64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    let (re, im) = split_mat(m);
    join_mat(&(v * re * v.transpose()), &(v * im * v.transpose()))
}
