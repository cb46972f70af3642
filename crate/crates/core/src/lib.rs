//! Simulation, optimization and analysis of variationally prepared
//! metrological states in small dipolar spin ensembles.
//!
//! Basis convention: qubit 0 is the most significant bit of a
//! computational-basis index, and bit value 0 is spin up (`S^z = +1/2`).

pub mod analysis;
mod bits;
pub mod controllability;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod metrology;
pub mod optimizer;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
