//! State characterization: entropies, entanglement clusters, spherical
//! Wigner functions, squeezing, fidelity, interaction cutoffs, preparation
//! time and reference states.

mod clusters;
mod cutoff;
mod entropy;
mod fidelity;
mod prep;
mod reference;
mod squeezing;
mod wigner;

pub use clusters::{cluster_partition, subset_entropies, ClusterPartition, MAX_CLUSTER_SPINS};
pub use cutoff::cutoff_fidelity;
pub use entropy::{entropy_of, reduced_density_matrix, single_spin_entropies, von_neumann_entropy};
pub use fidelity::state_fidelity;
pub use prep::{preparation_seconds, preparation_time};
pub use reference::{dicke_state, ghz_along, reference_state, ReferenceKind};
pub use squeezing::{collective_moments, squeezing_parameter};
pub use wigner::{
    gauss_legendre, spherical_harmonic, symmetric_projection, wigner_3j, wigner_distribution, WignerGrid,
};

/// Default entropy threshold for cluster identification.
pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.4;
