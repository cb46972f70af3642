use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::closure::{lie_closure, ClosureOptions, LieClosure};
use crate::engine::{collective_operator, local_pauli, Axis};
use crate::ensemble::{build_hamiltonian, coupling_matrix, generate_configuration, ConfigKind, InteractionModel, SpinConfiguration};
use crate::error::{invalid, Result};
use crate::C64;

pub const DIPOLAR_SEED: u64 = 1;

/// Control systems with global `J_x`, `J_y` drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlModel {
    /// Dipolar spin-1/2 ensemble at random 3D positions (10 nm scale, seed
    /// [`DIPOLAR_SEED`]). Generic positions carry no spatial symmetry.
    Dipolar,
    /// Dipolar spin-1/2 chain with 10 nm spacing. Its reflection symmetry
    /// shrinks the algebra from N = 4 on.
    DipolarChain,
    /// Uniform all-to-all `sum_{i<j} sigma_z^i sigma_z^j`.
    SymmetricIsing,
    /// One spin with `sigma_x`, `sigma_y` controls and no drift.
    SingleQubit,
}

impl std::str::FromStr for ControlModel {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dipolar" => Ok(ControlModel::Dipolar),
            "dipolar-chain" => Ok(ControlModel::DipolarChain),
            "symmetric-ising" => Ok(ControlModel::SymmetricIsing),
            "single-qubit" => Ok(ControlModel::SingleQubit),
            other => invalid(format!("unknown control model '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CompletelyControllable,
    /// Between the symmetric-Ising and the complete dimension.
    SubspaceControllable,
    BelowSubspaceBound,
    /// The closure budget ran out; only a lower bound is known.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub n: usize,
    pub model: String,
    pub dimension: usize,
    pub dim_without_identity: usize,
    pub dim_with_identity: usize,
    /// `false` if the reported dimensions are lower bounds.
    pub complete: bool,
    /// `C(N+3, N) - 1`.
    pub subspace_bound: usize,
    /// `4^N - 1`.
    pub complete_bound: usize,
    pub verdict: Verdict,
    pub rounds: usize,
    pub candidates: usize,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Global drives `J_x`, `J_y` preceded by the drift `h0`.
fn with_global_controls(h0: DMatrix<C64>, n: usize) -> Vec<DMatrix<C64>> {
    vec![h0, collective_operator(Axis::X, n), collective_operator(Axis::Y, n)]
}

/// Drift and global controls for a dipolar ensemble.
pub fn dipolar_generators(config: &SpinConfiguration) -> Result<Vec<DMatrix<C64>>> {
    let cm = coupling_matrix(config)?;
    let h = build_hamiltonian(&cm, config.model);
    let scale = h.matrix().amax();
    let h0 = if scale > 0.0 { h.complex_matrix() / C64::new(scale, 0.0) } else { h.complex_matrix() };
    Ok(with_global_controls(h0, config.n_spins()))
}

pub fn control_generators(model: ControlModel, n: usize) -> Result<Vec<DMatrix<C64>>> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    match model {
        ControlModel::Dipolar | ControlModel::DipolarChain => {
            if n < 2 {
                return invalid("a dipolar drift needs at least two spins");
            }
            let (kind, seed) = match model {
                ControlModel::Dipolar => (ConfigKind::Random3d, DIPOLAR_SEED),
                _ => (ConfigKind::Chain, 0),
            };
            let config = generate_configuration(kind, n, 10.0, seed, InteractionModel::DipolarSpinHalf)?;
            dipolar_generators(&config)
        }
        ControlModel::SymmetricIsing => {
            let d = 1usize << n;
            let mut h0 = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
            for i in 0..n {
                for j in i + 1..n {
                    h0 += local_pauli(Axis::Z, n, i) * local_pauli(Axis::Z, n, j);
                }
            }
            Ok(with_global_controls(h0, n))
        }
        ControlModel::SingleQubit => {
            if n != 1 {
                return invalid("the single-qubit model has exactly one spin");
            }
            Ok(vec![local_pauli(Axis::X, 1, 0), local_pauli(Axis::Y, 1, 0)])
        }
    }
}

/// Compare a closure with the subspace and complete controllability bounds.
///
/// Dimensions are compared with the identity direction counted, the
/// convention in which the complete algebra is `u(2^N)`.
pub fn report_from_closure(closure: &LieClosure, model: &str) -> ControllabilityReport {
    let n = closure.n;
    let subspace_bound = binomial(n + 3, n) - 1;
    let complete_bound = (1usize << (2 * n)) - 1;
    let verdict = if closure.dim_without_identity() >= complete_bound {
        Verdict::CompletelyControllable
    } else if !closure.complete {
        Verdict::Undetermined
    } else if closure.dim_with_identity() >= subspace_bound {
        Verdict::SubspaceControllable
    } else {
        Verdict::BelowSubspaceBound
    };
    ControllabilityReport {
        n,
        model: model.to_string(),
        dimension: closure.dimension(),
        dim_without_identity: closure.dim_without_identity(),
        dim_with_identity: closure.dim_with_identity(),
        complete: closure.complete,
        subspace_bound,
        complete_bound,
        verdict,
        rounds: closure.rounds,
        candidates: closure.candidates,
    }
}

pub fn controllability_report(model: ControlModel, n: usize, opts: &ClosureOptions) -> Result<ControllabilityReport> {
    let gens = control_generators(model, n)?;
    let closure = lie_closure(&gens, n, opts)?;
    let label = match model {
        ControlModel::Dipolar => "dipolar",
        ControlModel::DipolarChain => "dipolar-chain",
        ControlModel::SymmetricIsing => "symmetric-ising",
        ControlModel::SingleQubit => "single-qubit",
    };
    Ok(report_from_closure(&closure, label))
}
