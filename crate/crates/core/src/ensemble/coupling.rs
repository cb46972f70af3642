use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::{norm3, sub3, SpinConfiguration};
use crate::error::{invalid, Error, Result};

/// Vacuum permeability, CODATA 2018, N A^-2.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Symmetric pair couplings in rad/s with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub v: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        if !v.is_square() {
            return invalid("coupling matrix must be square");
        }
        let n = v.nrows();
        for i in 0..n {
            if v[(i, i)] != 0.0 {
                return invalid(format!("coupling diagonal entry {i} is nonzero"));
            }
            for j in 0..i {
                if v[(i, j)] != v[(j, i)] {
                    return invalid(format!("coupling matrix not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(CouplingMatrix { v })
    }

    /// All-to-all coupling of equal strength.
    pub fn uniform(n: usize, value: f64) -> Self {
        let v = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { value });
        CouplingMatrix { v }
    }

    pub fn n_spins(&self) -> usize {
        self.v.nrows()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        CouplingMatrix { v: &self.v * alpha }
    }

    /// Zero every entry whose magnitude, in Hz, is below `f_cutoff_hz`.
    pub fn with_cutoff(&self, f_cutoff_hz: f64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let v = self.v.map(|x| if x.abs() / two_pi < f_cutoff_hz { 0.0 } else { x });
        CouplingMatrix { v }
    }

    pub fn max_abs_hz(&self) -> f64 {
        self.v.iter().fold(0.0f64, |m, x| m.max(x.abs())) / (2.0 * std::f64::consts::PI)
    }
}

/// Single-hbar dipolar coupling, angular frequency units:
/// `V = mu0/(4 pi) gamma_i gamma_j hbar / r^3 * angular(beta)`.
pub fn pair_coupling(gamma_i: f64, gamma_j: f64, r_m: f64, angular: f64) -> f64 {
    MU0 / (4.0 * std::f64::consts::PI) * gamma_i * gamma_j * HBAR / (r_m * r_m * r_m) * angular
}

pub fn coupling_matrix(config: &SpinConfiguration) -> Result<CouplingMatrix> {
    config.validate()?;
    let n = config.n_spins();
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = sub3(&config.positions_nm[j], &config.positions_nm[i]);
            let r_nm = norm3(&d);
            if r_nm <= 0.0 {
                return Err(Error::CoincidentSpins(i, j));
            }
            let a = &config.field_axis;
            let cos_beta = (d[0] * a[0] + d[1] * a[1] + d[2] * a[2]) / r_nm;
            let value = pair_coupling(
                config.gamma_rad_per_s_t[i],
                config.gamma_rad_per_s_t[j],
                r_nm * 1e-9,
                config.angular_factor.eval(cos_beta),
            );
            v[(i, j)] = value;
            v[(j, i)] = value;
        }
    }
    Ok(CouplingMatrix { v })
}

/// Average over spins of `|V_ij*| / 2 pi` in Hz, where `j*` is the spin
/// nearest to `i` by distance (lowest index on ties).
pub fn mean_nn_coupling(coupling: &CouplingMatrix, config: &SpinConfiguration) -> Result<f64> {
    let n = config.n_spins();
    if n < 2 {
        return invalid("nearest-neighbor coupling needs at least two spins");
    }
    if coupling.n_spins() != n {
        return Err(Error::DimensionMismatch { expected: n, got: coupling.n_spins() });
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in (0..n).filter(|&j| j != i) {
            let d = config.distance_nm(i, j);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        total += coupling.v[(i, best)].abs();
    }
    Ok(total / n as f64 / (2.0 * std::f64::consts::PI))
}

/// Same average but with `j*` chosen as the strongest coupling partner.
pub fn mean_strongest_coupling(coupling: &CouplingMatrix) -> Result<f64> {
    let n = coupling.n_spins();
    if n < 2 {
        return invalid("nearest-neighbor coupling needs at least two spins");
    }
    let total: f64 = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| coupling.v[(i, j)].abs()).fold(0.0, f64::max))
        .sum();
    Ok(total / n as f64 / (2.0 * std::f64::consts::PI))
}
