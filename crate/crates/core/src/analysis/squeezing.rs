use crate::engine::{apply_collective, Axis, QuantumState, StateRepr};
use crate::error::{Error, Result};
use crate::C64;

/// `<J_a>` and `<J_a^2>` without forming dense operators.
pub fn collective_moments(state: &QuantumState, axis: Axis) -> (f64, f64) {
    let n = state.n_spins();
    match state.repr() {
        StateRepr::Pure(psi) => {
            let j = apply_collective(axis, n, psi.as_slice());
            let mean = psi.iter().zip(&j).map(|(a, b)| (a.conj() * b).re).sum();
            let second = j.iter().map(|x| x.norm_sqr()).sum();
            (mean, second)
        }
        StateRepr::Density(rho) => {
            let d = rho.nrows();
            let mut jr: Vec<C64> = Vec::with_capacity(d * d);
            for c in 0..d {
                jr.extend(apply_collective(axis, n, rho.column(c).as_slice()));
            }
            let mean = (0..d).map(|k| jr[k * d + k].re).sum();
            let mut jjr: Vec<C64> = Vec::with_capacity(d * d);
            for c in 0..d {
                jjr.extend(apply_collective(axis, n, &jr[c * d..(c + 1) * d]));
            }
            let second = (0..d).map(|k| jjr[k * d + k].re).sum();
            (mean, second)
        }
    }
}

/// Wineland parameter `xi^2 = N (Delta J_y)^2 / <J_x>^2` for an
/// x-polarized state squeezed along y.
pub fn squeezing_parameter(state: &QuantumState) -> Result<f64> {
    let (jx, _) = collective_moments(state, Axis::X);
    if jx.abs() < 1e-9 {
        return Err(Error::Numerical(format!("mean spin <J_x> = {jx:e} vanishes; squeezing undefined")));
    }
    let (jy, jy2) = collective_moments(state, Axis::Y);
    let var = jy2 - jy * jy;
    Ok(state.n_spins() as f64 * var / (jx * jx))
}
