use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gates::{evolve_in_place, rotate_in_place};
use super::lindblad::lindblad_dephasing_propagate;
use super::ops::Axis;
use super::state::QuantumState;
use crate::ensemble::Hamiltonian;
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Entangler parameters `(tau_1, theta_1, tau'_1, ..., tau_m, theta_m, tau'_m)`.
///
/// Times are in seconds, angles in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub m: usize,
    pub theta: Vec<f64>,
    pub tau_bound: f64,
}

impl CircuitParams {
    pub fn new(m: usize, theta: Vec<f64>, tau_bound: f64) -> Result<Self> {
        let p = CircuitParams { m, theta, tau_bound };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(m: usize, tau_bound: f64) -> Self {
        CircuitParams { m, theta: vec![0.0; 3 * m], tau_bound }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != 3 * self.m {
            return Err(Error::DimensionMismatch { expected: 3 * self.m, got: self.theta.len() });
        }
        if !(self.tau_bound > 0.0) {
            return invalid(format!("tau bound must be positive, got {}", self.tau_bound));
        }
        for (k, &x) in self.theta.iter().enumerate() {
            if !x.is_finite() {
                return invalid(format!("parameter {k} is not finite"));
            }
            if k % 3 == 1 {
                if !(0.0..2.0 * PI).contains(&x) {
                    return invalid(format!("angle parameter {k} = {x} outside [0, 2pi)"));
                }
            } else if x < 0.0 || x > self.tau_bound {
                return invalid(format!("time parameter {k} = {x} outside [0, {}]", self.tau_bound));
            }
        }
        Ok(())
    }

    /// `(tau, theta, tau')` of layer `i`.
    pub fn layer(&self, i: usize) -> (f64, f64, f64) {
        (self.theta[3 * i], self.theta[3 * i + 1], self.theta[3 * i + 2])
    }

    /// Total interaction time `sum (tau_i + tau'_i)` in seconds.
    pub fn total_time(&self) -> f64 {
        (0..self.m).map(|i| self.theta[3 * i] + self.theta[3 * i + 2]).sum()
    }
}

/// Preparation and readout imperfections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepNoiseSpec {
    /// Initialization fidelity, the net polarization along x.
    pub init_fidelity: f64,
    /// Dephasing time during the entangler in seconds; `None` is noiseless.
    pub t2_prep: Option<f64>,
    /// Readout fidelity `1 - p(flip)`.
    pub readout_fidelity: f64,
}

impl Default for PrepNoiseSpec {
    fn default() -> Self {
        PrepNoiseSpec { init_fidelity: 1.0, t2_prep: None, readout_fidelity: 1.0 }
    }
}

impl PrepNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.init_fidelity) {
            return invalid(format!("initialization fidelity {} outside [-1, 1]", self.init_fidelity));
        }
        if !(0.5..=1.0).contains(&self.readout_fidelity) {
            return invalid(format!("readout fidelity {} outside [0.5, 1]", self.readout_fidelity));
        }
        if let Some(t2) = self.t2_prep {
            if !(t2 > 0.0) {
                return invalid(format!("preparation T2 must be positive, got {t2}"));
            }
        }
        Ok(())
    }

    /// Lindblad rate `1 / (2 T2)` so that single-spin coherence decays as `exp(-t/T2)`.
    pub fn gamma_z(&self) -> f64 {
        self.t2_prep.map_or(0.0, |t2| if t2.is_finite() { 0.5 / t2 } else { 0.0 })
    }
}

/// `(|up_x>)^N` for `IF = 1`, otherwise the product of `(I + IF sigma_x)/2`.
pub fn initial_state(n: usize, init_fidelity: f64) -> Result<QuantumState> {
    if !(-1.0..=1.0).contains(&init_fidelity) {
        return invalid(format!("initialization fidelity {init_fidelity} outside [-1, 1]"));
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    if init_fidelity == 1.0 {
        return Ok(QuantumState::product(n, s, s));
    }
    let one = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5, 0.0),
            C64::new(0.5 * init_fidelity, 0.0),
            C64::new(0.5 * init_fidelity, 0.0),
            C64::new(0.5, 0.0),
        ],
    );
    let mut rho = one.clone();
    for _ in 1..n {
        rho = rho.kronecker(&one);
    }
    Ok(QuantumState::from_density_unchecked(n, rho))
}

/// Apply `U_m ... U_1` with
/// `U_i = R_y(pi/2) D(tau'_i) R_y(-pi/2) R_x(theta_i) D(tau_i)`.
pub fn apply_entangler(params: &CircuitParams, h: &Hamiltonian, input: &QuantumState) -> Result<QuantumState> {
    apply_entangler_noisy(params, h, input, 0.0)
}

/// Entangler with Markovian dephasing of rate `gamma_z` during the
/// interaction intervals; rotations are instantaneous.
pub fn apply_entangler_noisy(
    params: &CircuitParams,
    h: &Hamiltonian,
    input: &QuantumState,
    gamma_z: f64,
) -> Result<QuantumState> {
    if params.theta.len() != 3 * params.m {
        return Err(Error::DimensionMismatch { expected: 3 * params.m, got: params.theta.len() });
    }
    if h.n_spins() != input.n_spins() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: input.dim() });
    }
    let mut state = if gamma_z > 0.0 { input.to_density() } else { input.clone() };
    let interact = |s: &mut QuantumState, tau: f64| -> Result<()> {
        if gamma_z > 0.0 && tau > 0.0 {
            *s = lindblad_dephasing_propagate(s, h, gamma_z, tau)?;
            Ok(())
        } else {
            evolve_in_place(s, h, tau)
        }
    };
    for i in 0..params.m {
        let (tau, angle, tau2) = params.layer(i);
        interact(&mut state, tau)?;
        rotate_in_place(&mut state, Axis::X, angle);
        if tau2 != 0.0 {
            rotate_in_place(&mut state, Axis::Y, -FRAC_PI_2);
            interact(&mut state, tau2)?;
            rotate_in_place(&mut state, Axis::Y, FRAC_PI_2);
        }
    }
    Ok(state)
}
