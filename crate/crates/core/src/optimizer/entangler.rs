use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cmaes::{cmaes_minimize, Bound, CmaesConfig, OptimizationRecord, StopReason};
use crate::analysis::state_fidelity;
use crate::engine::{apply_entangler, apply_entangler_noisy, initial_state, CircuitParams, PrepNoiseSpec, QuantumState};
use crate::ensemble::{build_hamiltonian, coupling_matrix, mean_nn_coupling, Hamiltonian, SpinConfiguration};
use crate::error::{invalid, Error, Result};
use crate::metrology::{cfi_phi, MeasurementBasis};

/// Outcome of a circuit optimization. `record.best_cost` is the raw cost
/// (`-CFI` or the infidelity); `params` holds the best circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitOptimization {
    pub record: OptimizationRecord,
    pub params: CircuitParams,
    /// Mean nearest-neighbor coupling in Hz, which sets the `tau` bound `1 / f_dd`.
    pub f_dd_hz: f64,
    /// `f_dd * sum (tau_i + tau'_i)` of the best circuit.
    pub fdd_t: f64,
}

impl CircuitOptimization {
    /// Best CFI for a run whose cost is `-CFI`.
    pub fn cfi(&self) -> f64 {
        -self.record.best_cost
    }
}

/// Box bounds for `m` layers: `tau, tau'` reflected in `[0, tau_bound]`, angles wrapped in `[0, 2pi)`.
pub fn circuit_bounds(m: usize, tau_bound: f64) -> Vec<Bound> {
    (0..3 * m)
        .map(|k| if k % 3 == 1 { Bound::wrap(0.0, 2.0 * PI) } else { Bound::reflect(0.0, tau_bound) })
        .collect()
}

fn setup(config: &SpinConfiguration) -> Result<(Hamiltonian, f64)> {
    config.validate()?;
    let cm = coupling_matrix(config)?;
    let f_dd = mean_nn_coupling(&cm, config)?;
    if !(f_dd > 0.0) {
        return invalid("mean nearest-neighbor coupling vanishes; the tau bound is undefined");
    }
    Ok((build_hamiltonian(&cm, config.model), f_dd))
}

fn empty_record(cost: f64, seed: u64) -> OptimizationRecord {
    OptimizationRecord {
        history: Vec::new(),
        theta: Vec::new(),
        best_cost: cost,
        evaluations: 1,
        generations: 0,
        seed,
        stop_reason: StopReason::MaxGenerations,
        wall_time_s: 0.0,
    }
}

fn finish(record: OptimizationRecord, m: usize, f_dd: f64) -> Result<CircuitOptimization> {
    let params = CircuitParams::new(m, record.theta.clone(), 1.0 / f_dd)?;
    let fdd_t = f_dd * params.total_time();
    Ok(CircuitOptimization { record, params, f_dd_hz: f_dd, fdd_t })
}

/// CFI of the entangler output for the given circuit, noise and readout.
pub fn entangler_cfi(
    params: &CircuitParams,
    h: &Hamiltonian,
    basis: MeasurementBasis,
    noise: &PrepNoiseSpec,
) -> Result<f64> {
    let input = initial_state(h.n_spins(), noise.init_fidelity)?;
    let out = apply_entangler_noisy(params, h, &input, noise.gamma_z())?;
    cfi_phi(&out, basis, noise.readout_fidelity)
}

/// Maximize the CFI of the entangler output by minimizing `-CFI`.
pub fn optimize_entangler(
    config: &SpinConfiguration,
    m: usize,
    basis: MeasurementBasis,
    noise: &PrepNoiseSpec,
    cma: &CmaesConfig,
) -> Result<CircuitOptimization> {
    noise.validate()?;
    if m == 0 {
        let input = initial_state(config.n_spins(), noise.init_fidelity)?;
        let cfi = cfi_phi(&input, basis, noise.readout_fidelity)?;
        let f_dd = if config.n_spins() > 1 { setup(config)?.1 } else { 1.0 };
        return finish(empty_record(-cfi, cma.seed), 0, f_dd);
    }
    let (h, f_dd) = setup(config)?;
    let tau_bound = 1.0 / f_dd;
    let cost = |theta: &[f64]| -> f64 {
        let params = CircuitParams { m, theta: theta.to_vec(), tau_bound };
        entangler_cfi(&params, &h, basis, noise).map_or(f64::NAN, |c| -c)
    };
    let record = cmaes_minimize(cost, &circuit_bounds(m, tau_bound), cma)?;
    finish(record, m, f_dd)
}

/// Minimize `1 - |<target|S(theta)|CSS>|^2` over noiseless circuits.
pub fn optimize_fidelity(
    target: &QuantumState,
    config: &SpinConfiguration,
    m: usize,
    cma: &CmaesConfig,
) -> Result<CircuitOptimization> {
    if target.n_spins() != config.n_spins() {
        return Err(Error::DimensionMismatch { expected: config.n_spins(), got: target.n_spins() });
    }
    if !target.is_pure() {
        return invalid("fidelity target must be a pure state");
    }
    let css = initial_state(config.n_spins(), 1.0)?;
    if m == 0 {
        let f_dd = if config.n_spins() > 1 { setup(config)?.1 } else { 1.0 };
        return finish(empty_record(1.0 - state_fidelity(target, &css)?, cma.seed), 0, f_dd);
    }
    let (h, f_dd) = setup(config)?;
    let tau_bound = 1.0 / f_dd;
    let cost = |theta: &[f64]| -> f64 {
        let params = CircuitParams { m, theta: theta.to_vec(), tau_bound };
        apply_entangler(&params, &h, &css)
            .and_then(|out| state_fidelity(target, &out))
            .map_or(f64::NAN, |f| 1.0 - f)
    };
    let record = cmaes_minimize(cost, &circuit_bounds(m, tau_bound), cma)?;
    finish(record, m, f_dd)
}
