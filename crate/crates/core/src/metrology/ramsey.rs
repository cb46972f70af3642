use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::fisher::fisher_from_distribution;
use super::measurement::{aggregate, check_rf, full_z_derivative, readout_channel, MeasurementBasis};
use crate::engine::{global_rotation, nonmarkovian_propagate, Axis, QuantumState};
use crate::error::{invalid, Error, Result};

/// Non-Markovian dephasing parameters of the Ramsey interrogation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyNoise {
    pub t2: f64,
    pub nu: f64,
}

/// Outcome statistics of one Ramsey interrogation of length `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyPoint {
    pub t: f64,
    pub probabilities: Vec<f64>,
    /// `dP/d omega` at the signal value used.
    pub derivative_omega: Vec<f64>,
    pub cfi_omega: f64,
}

/// State just before readout: rotate the prepared state into the
/// experiment frame with `R_x(-pi/2)`, accumulate signal `omega` under
/// dephasing for `t`, and apply the readout pulse `R_x(pi/2)`.
pub fn ramsey_readout_state(state: &QuantumState, omega: f64, noise: RamseyNoise, t: f64) -> Result<QuantumState> {
    let rho = global_rotation(&state.to_density(), Axis::X, -FRAC_PI_2);
    let rho_t = nonmarkovian_propagate(&rho, omega, noise.t2, noise.nu, t)?;
    Ok(global_rotation(&rho_t, Axis::X, FRAC_PI_2))
}

/// Probabilities and Fisher information about `omega` after a Ramsey
/// sequence of length `t`. The readout pulse maps `J_z` to `-J_y`, so
/// `dP/d omega = -t dP/d phi` evaluated on the readout state.
pub fn ramsey_point(
    state: &QuantumState,
    basis: MeasurementBasis,
    rf: f64,
    omega: f64,
    noise: RamseyNoise,
    t: f64,
) -> Result<RamseyPoint> {
    check_rf(rf)?;
    let n = state.n_spins();
    let r = ramsey_readout_state(state, omega, noise, t)?;
    let mut p = r.z_probabilities();
    let mut dp = full_z_derivative(&r);
    readout_channel(&mut p, n, rf);
    readout_channel(&mut dp, n, rf);
    let p = aggregate(&p, n, basis);
    let dphi = aggregate(&dp, n, basis);
    let cfi_phi = fisher_from_distribution(&p, &dphi, n)?;
    Ok(RamseyPoint {
        t,
        probabilities: p,
        derivative_omega: dphi.iter().map(|x| -t * x).collect(),
        cfi_omega: cfi_phi * t * t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyCurve {
    pub t: Vec<f64>,
    pub cfi_omega: Vec<f64>,
    /// `CFI_omega / (t + t_oh)`, proportional to SNR^2 per unit total time.
    pub snr2: Vec<f64>,
    pub t_overhead: f64,
    pub best_t: f64,
    pub best_snr2: f64,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return invalid("time grid is empty");
    }
    if t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("time grid must be positive and strictly ascending");
    }
    Ok(())
}

/// `CFI_omega / t` over a grid of interrogation times at zero signal.
pub fn ramsey_snr_curve(
    state: &QuantumState,
    basis: MeasurementBasis,
    rf: f64,
    noise: RamseyNoise,
    t_grid: &[f64],
) -> Result<RamseyCurve> {
    snr_with_overhead(state, basis, rf, noise, 0.0, t_grid)
}

/// `CFI_omega / (t + t_oh)` over a grid of interrogation times.
pub fn snr_with_overhead(
    state: &QuantumState,
    basis: MeasurementBasis,
    rf: f64,
    noise: RamseyNoise,
    t_oh: f64,
    t_grid: &[f64],
) -> Result<RamseyCurve> {
    check_grid(t_grid)?;
    if !(t_oh >= 0.0) {
        return invalid(format!("overhead time must be non-negative, got {t_oh}"));
    }
    let mut cfi = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let pt = ramsey_point(state, basis, rf, 0.0, noise, t)
            .map_err(|e| Error::Numerical(format!("Ramsey point t = {t}: {e}")))?;
        cfi.push(pt.cfi_omega);
    }
    let snr2: Vec<f64> = cfi.iter().zip(t_grid).map(|(c, t)| c / (t + t_oh)).collect();
    let (k, best) = snr2
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    Ok(RamseyCurve { t: t_grid.to_vec(), cfi_omega: cfi, snr2, t_overhead: t_oh, best_t: t_grid[k], best_snr2: best })
}

/// Maximize `CFI_omega / (t + t_oh)` over `[t_lo, t_hi]`: grid scan followed
/// by golden-section refinement. Returns `(t*, SNR^2(t*))`.
pub fn optimal_ramsey_time(
    state: &QuantumState,
    basis: MeasurementBasis,
    rf: f64,
    noise: RamseyNoise,
    t_oh: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<(f64, f64)> {
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return invalid("optimal time search needs 0 < t_lo < t_hi");
    }
    let f = |t: f64| -> Result<f64> { Ok(ramsey_point(state, basis, rf, 0.0, noise, t)?.cfi_omega / (t + t_oh)) };
    let grid = 48;
    let ts: Vec<f64> = (0..=grid).map(|k| t_lo + (t_hi - t_lo) * k as f64 / grid as f64).collect();
    let mut best = 0;
    let mut vals = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        vals.push(f(t)?);
        if vals[k] > vals[best] {
            best = k;
        }
    }
    let a = ts[best.saturating_sub(1)];
    let b = ts[(best + 1).min(grid)];
    let t = golden_max(|t| f(t), a, b, 1e-10 * (t_hi - t_lo))?;
    let v = f(t)?;
    Ok(if v >= vals[best] { (t, v) } else { (ts[best], vals[best]) })
}

pub(crate) fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Optimal Ramsey time of a coherent spin state when overhead dominates.
pub fn css_optimal_time(t2: f64, nu: f64) -> f64 {
    t2 / nu.powf(1.0 / nu)
}

/// Optimal Ramsey time of an `n`-spin GHZ state when overhead dominates.
pub fn ghz_optimal_time(t2: f64, nu: f64, n: usize) -> f64 {
    t2 / (n as f64 * nu).powf(1.0 / nu)
}

/// Ratio of optimal SNR^2 of GHZ over CSS with dominant overhead, `n^(1 - 2/nu)`.
pub fn ghz_css_overhead_ratio(n: usize, nu: f64) -> f64 {
    (n as f64).powf(1.0 - 2.0 / nu)
}

/// Closed-form single-qubit Ramsey result with Markovian dephasing rate
/// `gamma`: `P0 = 1/2 + exp(-2 gamma t) sin(omega t) / 2` and
/// `CFI_omega = t^2 cos^2(omega t) / (exp(4 gamma t) - sin^2(omega t))`.
pub fn single_qubit_oracle(omega: f64, gamma: f64, t: f64) -> Result<(f64, f64)> {
    if !(gamma >= 0.0) {
        return invalid(format!("gamma must be non-negative, got {gamma}"));
    }
    let s = (omega * t).sin();
    let c = (omega * t).cos();
    let p0 = 0.5 + 0.5 * (-2.0 * gamma * t).exp() * s;
    let cfi = if gamma == 0.0 {
        t * t
    } else {
        t * t * c * c / ((4.0 * gamma * t).exp() - s * s)
    };
    Ok((p0, cfi))
}
