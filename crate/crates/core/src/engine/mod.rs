//! State representation and exact evolution: global rotations, interaction
//! gates, the layered entangler and dephasing master equations.

mod circuit;
mod gates;
mod lindblad;
pub mod ode;
mod ops;
mod state;

pub use circuit::{apply_entangler, apply_entangler_noisy, initial_state, CircuitParams, PrepNoiseSpec};
pub use gates::{global_rotation, interaction_evolution, ramsey_phase};
pub use lindblad::{
    lindblad_dephasing_propagate, lindblad_dephasing_propagate_with, nonmarkovian_closed_form,
    nonmarkovian_propagate, nonmarkovian_propagate_with, nonmarkovian_rate,
};
pub use ops::{apply_collective, collective_operator, local_pauli, pauli, rotation_gate, Axis, Gate2};
pub use state::{QuantumState, StateRepr};
