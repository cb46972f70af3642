//! Measurement models, classical Fisher information, Ramsey interrogation
//! under non-Markovian dephasing and a maximum-likelihood harness.

mod fisher;
mod measurement;
mod mle;
mod ramsey;

pub use fisher::{cfi_omega, cfi_phi, cfi_phi_at, fisher_from_distribution};
pub use measurement::{
    aggregate, distribution_derivative, distribution_with_derivative, full_z_derivative,
    outcome_distribution, readout_channel, MeasurementBasis, OutcomeDistribution,
};
pub use mle::{mle_simulate, MleConfig, MleResult};
pub use ramsey::{
    css_optimal_time, ghz_css_overhead_ratio, ghz_optimal_time, optimal_ramsey_time, ramsey_point,
    ramsey_readout_state, ramsey_snr_curve, single_qubit_oracle, snr_with_overhead, RamseyCurve,
    RamseyNoise, RamseyPoint,
};
