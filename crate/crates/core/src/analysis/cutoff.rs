use super::fidelity::state_fidelity;
use crate::engine::{apply_entangler, initial_state, CircuitParams};
use crate::ensemble::{build_hamiltonian, coupling_matrix, SpinConfiguration};
use crate::error::Result;

/// Fidelity between the entangler output with all couplings and the output
/// with every `|V_ij|/2pi < f_cutoff_hz` set to zero, starting from the
/// coherent spin state.
pub fn cutoff_fidelity(config: &SpinConfiguration, params: &CircuitParams, f_cutoff_hz: f64) -> Result<f64> {
    let cm = coupling_matrix(config)?;
    let css = initial_state(config.n_spins(), 1.0)?;
    let full = apply_entangler(params, &build_hamiltonian(&cm, config.model), &css)?;
    let cut = apply_entangler(params, &build_hamiltonian(&cm.with_cutoff(f_cutoff_hz), config.model), &css)?;
    state_fidelity(&full, &cut)
}
