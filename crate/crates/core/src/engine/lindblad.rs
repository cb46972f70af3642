use nalgebra::DMatrix;

use super::gates::{join_mat, split_mat};
use super::ode::{integrate, OdeTolerance};
use super::state::{QuantumState, StateRepr};
use crate::bits::{magnetization, z_sign};
use crate::ensemble::Hamiltonian;
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Number of spins whose z value differs between basis states `a` and `b`.
fn hamming(a: usize, b: usize) -> f64 {
    (a ^ b).count_ones() as f64
}

fn density_of(state: &QuantumState) -> Result<&DMatrix<C64>> {
    match state.repr() {
        StateRepr::Density(r) => Ok(r),
        StateRepr::Pure(_) => invalid("master-equation propagation needs a density state"),
    }
}

/// Integrate `d rho/dt = -i[H, rho] + gamma_z sum_i (Z_i rho Z_i - rho)` for
/// `duration` seconds.
pub fn lindblad_dephasing_propagate(
    rho: &QuantumState,
    h: &Hamiltonian,
    gamma_z: f64,
    duration: f64,
) -> Result<QuantumState> {
    lindblad_dephasing_propagate_with(rho, h, gamma_z, duration, OdeTolerance::default())
}

pub fn lindblad_dephasing_propagate_with(
    rho: &QuantumState,
    h: &Hamiltonian,
    gamma_z: f64,
    duration: f64,
    tol: OdeTolerance,
) -> Result<QuantumState> {
    let r0 = density_of(rho)?;
    if !(gamma_z >= 0.0) {
        return invalid(format!("dephasing rate must be non-negative, got {gamma_z}"));
    }
    if !(duration >= 0.0) {
        return invalid(format!("duration must be non-negative, got {duration}"));
    }
    if h.n_spins() != rho.n_spins() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    let n = rho.n_spins();
    let d = rho.dim();
    let v = h.eigenvectors();
    let e = h.eigenvalues();
    // Interaction picture in the eigenbasis of H: the unitary part is exact and
    // only the dephasing term is integrated.
    let z_eig: Vec<DMatrix<f64>> = (0..n)
        .map(|q| {
            let diag = DMatrix::from_fn(d, d, |a, b| if a == b { z_sign(n, q, a) } else { 0.0 });
            v.transpose() * diag * v
        })
        .collect();
    let omega: Vec<f64> = (0..d * d).map(|k| e[k % d] - e[k / d]).collect();
    let rho_eig = {
        let (re, im) = split_mat(r0);
        join_mat(&(v.tr_mul(&re) * v), &(v.tr_mul(&im) * v))
    };
    let f = |t: f64, y: &[C64], dy: &mut [C64]| {
        let mut sch = DMatrix::from_column_slice(d, d, y);
        for (k, x) in sch.iter_mut().enumerate() {
            *x *= C64::from_polar(1.0, -omega[k] * t);
        }
        let (re, im) = split_mat(&sch);
        let mut acc_re = re.clone() * (-(n as f64));
        let mut acc_im = im.clone() * (-(n as f64));
        for z in &z_eig {
            acc_re += z * &re * z;
            acc_im += z * &im * z;
        }
        for k in 0..d * d {
            dy[k] = gamma_z * C64::new(acc_re.as_slice()[k], acc_im.as_slice()[k]) * C64::from_polar(1.0, omega[k] * t);
        }
    };
    let y = if gamma_z == 0.0 {
        rho_eig.as_slice().to_vec()
    } else {
        integrate(f, 0.0, duration, rho_eig.as_slice().to_vec(), tol)?
    };
    let mut out = DMatrix::from_vec(d, d, y);
    for (k, x) in out.iter_mut().enumerate() {
        *x *= C64::from_polar(1.0, -omega[k] * duration);
    }
    let (re, im) = split_mat(&out);
    let rho_t = join_mat(&(v * re * v.transpose()), &(v * im * v.transpose()));
    Ok(QuantumState::from_density_unchecked(n, rho_t))
}

/// Time-local dephasing rate `gamma_z(t) = nu t^(nu-1) / (2 T2^nu)`.
pub fn nonmarkovian_rate(t: f64, t2: f64, nu: f64) -> f64 {
    nu * t.powf(nu - 1.0) / (2.0 * t2.powf(nu))
}

/// Propagate under independent per-spin stretched-exponential dephasing
/// with a z signal of angular frequency `omega`.
pub fn nonmarkovian_propagate(
    rho: &QuantumState,
    omega: f64,
    t2: f64,
    nu: f64,
    t: f64,
) -> Result<QuantumState> {
    nonmarkovian_propagate_with(rho, omega, t2, nu, t, OdeTolerance::default())
}

pub fn nonmarkovian_propagate_with(
    rho: &QuantumState,
    omega: f64,
    t2: f64,
    nu: f64,
    t: f64,
    tol: OdeTolerance,
) -> Result<QuantumState> {
    let r0 = density_of(rho)?;
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("propagation time must be non-negative, got {t}"));
    }
    if !(t2 > 0.0) {
        return invalid(format!("T2 must be positive, got {t2}"));
    }
    if !(nu >= 1.0) || !nu.is_finite() {
        return invalid(format!("stretch exponent must be at least 1, got {nu}"));
    }
    let n = rho.n_spins();
    let d = rho.dim();
    let mut phase = Vec::with_capacity(d * d);
    let mut dist = Vec::with_capacity(d * d);
    for k in 0..d * d {
        let (a, b) = (k % d, k / d);
        let ds = (magnetization(n, a) - magnetization(n, b)) as f64;
        phase.push(C64::new(0.0, -0.5 * omega * ds));
        dist.push(-2.0 * hamming(a, b));
    }
    let f = |s: f64, y: &[C64], dy: &mut [C64]| {
        let g = nonmarkovian_rate(s, t2, nu);
        for k in 0..y.len() {
            dy[k] = (phase[k] + dist[k] * g) * y[k];
        }
    };
    let y = integrate(f, 0.0, t, r0.as_slice().to_vec(), tol)?;
    Ok(QuantumState::from_density_unchecked(n, DMatrix::from_vec(d, d, y)))
}

/// Closed-form solution of the same equation, used as a check.
pub fn nonmarkovian_closed_form(rho: &QuantumState, omega: f64, t2: f64, nu: f64, t: f64) -> Result<QuantumState> {
    let r0 = density_of(rho)?;
    let n = rho.n_spins();
    let d = rho.dim();
    let env = (t / t2).powf(nu);
    let r = DMatrix::from_fn(d, d, |a, b| {
        let ds = (magnetization(n, a) - magnetization(n, b)) as f64;
        r0[(a, b)] * C64::from_polar((-env * hamming(a, b)).exp(), -0.5 * omega * ds * t)
    });
    Ok(QuantumState::from_density_unchecked(n, r))
}
