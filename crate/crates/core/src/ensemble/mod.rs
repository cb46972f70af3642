//! Spin configurations, dipolar couplings and interaction Hamiltonians.

mod config;
mod coupling;
mod hamiltonian;

pub use config::{
    generate_configuration, square_lattice_sites, AngularFactor, ConfigKind, InteractionModel,
    SpinConfiguration, GAMMA_NV,
};
pub use coupling::{
    coupling_matrix, mean_nn_coupling, mean_strongest_coupling, pair_coupling, CouplingMatrix,
    HBAR, MU0,
};
pub use hamiltonian::{build_hamiltonian, Hamiltonian};
