use super::measurement::{distribution_with_derivative, MeasurementBasis};
use crate::engine::{ramsey_phase, QuantumState};
use crate::error::{Error, Result};

const P_FLOOR: f64 = 1e-14;
const DP_FLOOR: f64 = 1e-12;

/// `sum_k dp_k^2 / p_k` with the zero-probability rules.
///
/// Every outcome obeys `|dp_k| <= n sqrt(p_k)`. Below `p = 1e-14` both
/// numbers are dominated by rounding: terms with `|dp| < 1e-12` or `p <= 0`
/// are dropped and the rest are clamped to the ceiling `n^2`. A tail
/// derivative above `n * 1e-7`, or a regular term above `n^2`, is an error.
pub fn fisher_from_distribution(p: &[f64], dp: &[f64], n: usize) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: dp.len() });
    }
    let ceiling = (n * n) as f64;
    let tail_dp = n as f64 * P_FLOOR.sqrt() * (1.0 + 1e-6);
    let mut total = 0.0;
    for (k, (&pk, &dk)) in p.iter().zip(dp).enumerate() {
        if pk < P_FLOOR {
            if dk.abs() > tail_dp {
                return Err(Error::Numerical(format!(
                    "outcome {k} has probability {pk:e} but derivative {dk:e}"
                )));
            }
            if dk.abs() >= DP_FLOOR && pk > 0.0 {
                total += (dk * dk / pk).min(ceiling);
            }
            continue;
        }
        let term = dk * dk / pk;
        if !term.is_finite() || term > ceiling * (1.0 + 1e-6) + 1e-9 {
            return Err(Error::Numerical(format!(
                "outcome {k} contributes {term:e} (p = {pk:e}, dp = {dk:e}), above the bound {ceiling}"
            )));
        }
        total += term;
    }
    Ok(total)
}

/// Classical Fisher information for the phase `phi` of `exp(-i phi J_y)` at
/// `phi = 0`.
pub fn cfi_phi(state: &QuantumState, basis: MeasurementBasis, rf: f64) -> Result<f64> {
    let dist = distribution_with_derivative(state, basis, rf)?;
    let dp = dist.derivative.as_deref().unwrap_or(&[]);
    fisher_from_distribution(&dist.probabilities, dp, state.n_spins())
}

/// Fisher information at a finite operating point `phi`.
pub fn cfi_phi_at(state: &QuantumState, basis: MeasurementBasis, rf: f64, phi: f64) -> Result<f64> {
    cfi_phi(&ramsey_phase(state, phi), basis, rf)
}

/// `CFI_omega = CFI_phi t^2`.
pub fn cfi_omega(cfi_phi_value: f64, t_r: f64) -> f64 {
    cfi_phi_value * t_r * t_r
}
