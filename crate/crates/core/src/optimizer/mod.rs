//! CMA-ES and the circuit cost functions built on it.

mod cmaes;
mod entangler;

pub use cmaes::{cmaes_minimize, Bound, BoundKind, CmaesConfig, GenerationStats, OptimizationRecord, StopReason};
pub use entangler::{circuit_bounds, entangler_cfi, optimize_entangler, optimize_fidelity, CircuitOptimization};
