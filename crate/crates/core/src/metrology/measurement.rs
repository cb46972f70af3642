use serde::{Deserialize, Serialize};

use crate::bits::mask;
use crate::engine::{apply_collective, Axis, QuantumState, StateRepr};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementBasis {
    /// All `2^N` computational-basis outcomes.
    FullZ,
    /// `N + 1` outcomes indexed by the number of down spins.
    TotalJz,
    /// Two outcomes: even (index 0) or odd number of down spins.
    Parity,
}

impl MeasurementBasis {
    pub fn n_outcomes(&self, n: usize) -> usize {
        match self {
            MeasurementBasis::FullZ => 1 << n,
            MeasurementBasis::TotalJz => n + 1,
            MeasurementBasis::Parity => 2,
        }
    }
}

impl std::str::FromStr for MeasurementBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-z" => Ok(MeasurementBasis::FullZ),
            "total-jz" => Ok(MeasurementBasis::TotalJz),
            "parity" => Ok(MeasurementBasis::Parity),
            other => invalid(format!("unknown measurement basis '{other}'")),
        }
    }
}

/// Outcome probabilities and, optionally, their phase derivative at the
/// operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub basis: MeasurementBasis,
    pub probabilities: Vec<f64>,
    pub derivative: Option<Vec<f64>>,
}

pub(crate) fn check_rf(rf: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&rf) {
        return invalid(format!("readout fidelity {rf} outside [0.5, 1]"));
    }
    Ok(())
}

/// Independent symmetric bit-flip with probability `1 - rf` on every spin,
/// applied to a full-z vector (probabilities or derivatives alike).
pub fn readout_channel(values: &mut [f64], n: usize, rf: f64) {
    if rf == 1.0 {
        return;
    }
    let flip = 1.0 - rf;
    for q in 0..n {
        let m = mask(n, q);
        for b in 0..values.len() {
            if b & m == 0 {
                let (x0, x1) = (values[b], values[b | m]);
                values[b] = rf * x0 + flip * x1;
                values[b | m] = flip * x0 + rf * x1;
            }
        }
    }
}

/// Collapse a full-z vector onto the outcomes of `basis`.
pub fn aggregate(full: &[f64], n: usize, basis: MeasurementBasis) -> Vec<f64> {
    match basis {
        MeasurementBasis::FullZ => full.to_vec(),
        MeasurementBasis::TotalJz => {
            let mut out = vec![0.0; n + 1];
            for (b, x) in full.iter().enumerate() {
                out[b.count_ones() as usize] += x;
            }
            out
        }
        MeasurementBasis::Parity => {
            let mut out = vec![0.0; 2];
            for (b, x) in full.iter().enumerate() {
                out[(b.count_ones() % 2) as usize] += x;
            }
            out
        }
    }
}

/// `dP_z/dphi` at `phi = 0` for the signal `exp(-i phi J_y)`, computed as
/// `2 Im(conj(psi_z) (J_y psi)_z)` or `2 Im((J_y rho)_zz)`.
pub fn full_z_derivative(state: &QuantumState) -> Vec<f64> {
    let n = state.n_spins();
    match state.repr() {
        StateRepr::Pure(psi) => {
            let jy = apply_collective(Axis::Y, n, psi.as_slice());
            psi.iter().zip(jy).map(|(a, b)| 2.0 * (a.conj() * b).im).collect()
        }
        StateRepr::Density(rho) => {
            let d = rho.nrows();
            (0..d)
                .map(|z| {
                    let col = rho.column(z);
                    let mut w = crate::C64::new(0.0, 0.0);
                    for q in 0..n {
                        let m = mask(n, q);
                        // (sigma_y/2) row z picks up -i/2 from the flipped partner when z has bit 0
                        if z & m == 0 {
                            w += crate::C64::new(0.0, -0.5) * col[z | m];
                        } else {
                            w += crate::C64::new(0.0, 0.5) * col[z & !m];
                        }
                    }
                    2.0 * w.im
                })
                .collect()
        }
    }
}

pub fn outcome_distribution(state: &QuantumState, basis: MeasurementBasis, rf: f64) -> Result<OutcomeDistribution> {
    check_rf(rf)?;
    let n = state.n_spins();
    let mut p = state.z_probabilities();
    readout_channel(&mut p, n, rf);
    Ok(OutcomeDistribution { basis, probabilities: aggregate(&p, n, basis), derivative: None })
}

/// Exact `dP/dphi` at `phi = 0`, passed through the same readout channel.
pub fn distribution_derivative(state: &QuantumState, basis: MeasurementBasis, rf: f64) -> Result<Vec<f64>> {
    check_rf(rf)?;
    let n = state.n_spins();
    let mut dp = full_z_derivative(state);
    readout_channel(&mut dp, n, rf);
    Ok(aggregate(&dp, n, basis))
}

/// Probabilities together with their derivative.
pub fn distribution_with_derivative(
    state: &QuantumState,
    basis: MeasurementBasis,
    rf: f64,
) -> Result<OutcomeDistribution> {
    let mut dist = outcome_distribution(state, basis, rf)?;
    dist.derivative = Some(distribution_derivative(state, basis, rf)?);
    Ok(dist)
}
