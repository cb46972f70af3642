//! Dynamical Lie algebras of globally driven spin ensembles.

mod closure;
mod pauli;
mod report;

pub use closure::{lie_closure, ClosureOptions, ClosureStrategy, LieClosure};
pub use pauli::{is_hermitian, pauli_coefficients, pauli_matrix, pauli_string};
pub use report::{
    control_generators, controllability_report, dipolar_generators, report_from_closure, ControlModel,
    ControllabilityReport, Verdict, DIPOLAR_SEED,
};
