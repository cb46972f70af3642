use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Gyromagnetic ratio of an NV electron spin, rad s^-1 T^-1.
pub const GAMMA_NV: f64 = 2.0 * std::f64::consts::PI * 28.03e9;

/// Pairwise interaction model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionModel {
    /// `V (2 SzSz - SxSx - SySy)`
    DipolarSpinHalf,
    /// `V (SzSz - SxSx - SySy)`, the two-level projection of the NV ensemble.
    NvEffective,
    /// `2 V SzSz`, the spin-echo form with flip-flop terms removed.
    Ising,
    /// `V (j_ising SzSz + j_heis S.S)`
    Generic { j_ising: f64, j_heis: f64 },
}

impl InteractionModel {
    /// Coefficients `(a_zz, a_flip)` so that the pair term is
    /// `V (a_zz SzSz + a_flip (SxSx + SySy))`.
    pub fn pair_coefficients(&self) -> (f64, f64) {
        match *self {
            InteractionModel::DipolarSpinHalf => (2.0, -1.0),
            InteractionModel::NvEffective => (1.0, -1.0),
            InteractionModel::Ising => (2.0, 0.0),
            InteractionModel::Generic { j_ising, j_heis } => (j_ising + j_heis, j_heis),
        }
    }
}

/// Angular dependence of the dipolar coupling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularFactor {
    /// `(1 - 3 cos^2 beta) / 2`
    #[default]
    Cos2,
    /// `(1 - 3 cos beta) / 2`, the literal printed form.
    Cos1,
}

impl AngularFactor {
    pub fn eval(&self, cos_beta: f64) -> f64 {
        match self {
            AngularFactor::Cos2 => 0.5 * (1.0 - 3.0 * cos_beta * cos_beta),
            AngularFactor::Cos1 => 0.5 * (1.0 - 3.0 * cos_beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigKind {
    Chain,
    SquareLattice,
    Circle,
    #[serde(rename = "random-3d")]
    Random3d,
}

impl std::str::FromStr for ConfigKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(ConfigKind::Chain),
            "square-lattice" => Ok(ConfigKind::SquareLattice),
            "circle" => Ok(ConfigKind::Circle),
            "random-3d" => Ok(ConfigKind::Random3d),
            other => invalid(format!("unknown configuration kind '{other}'")),
        }
    }
}

/// Spin positions and species.
///
/// Positions are in nanometers, `gamma` in rad s^-1 T^-1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinConfiguration {
    pub positions_nm: Vec<[f64; 3]>,
    pub gamma_rad_per_s_t: Vec<f64>,
    pub field_axis: [f64; 3],
    pub model: InteractionModel,
    #[serde(default)]
    pub angular_factor: AngularFactor,
    pub label: String,
    pub seed: Option<u64>,
}

const MIN_DISTANCE_FRACTION: f64 = 0.05;
const MAX_RANDOM_RETRIES: usize = 1000;

impl SpinConfiguration {
    /// Identical NV-like spins at the given positions, field along z.
    pub fn from_positions(positions_nm: Vec<[f64; 3]>, model: InteractionModel) -> Result<Self> {
        let n = positions_nm.len();
        let cfg = SpinConfiguration {
            positions_nm,
            gamma_rad_per_s_t: vec![GAMMA_NV; n],
            field_axis: [0.0, 0.0, 1.0],
            model,
            angular_factor: AngularFactor::Cos2,
            label: "custom".into(),
            seed: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_spins(&self) -> usize {
        self.positions_nm.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_spins();
        if n == 0 {
            return invalid("configuration has no spins");
        }
        if self.gamma_rad_per_s_t.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.gamma_rad_per_s_t.len() });
        }
        let norm = norm3(&self.field_axis);
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("field axis norm {norm} is not 1"));
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.distance_nm(i, j) <= 0.0 {
                    return Err(Error::CoincidentSpins(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn distance_nm(&self, i: usize, j: usize) -> f64 {
        norm3(&sub3(&self.positions_nm[j], &self.positions_nm[i]))
    }

    /// Replace the field axis, normalizing the given direction.
    pub fn with_field_axis(mut self, axis: [f64; 3]) -> Result<Self> {
        let norm = norm3(&axis);
        if norm == 0.0 || !norm.is_finite() {
            return invalid("field axis must be a nonzero finite vector");
        }
        self.field_axis = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
        Ok(self)
    }
}

/// Build a configuration of `n` NV-like spins.
///
/// `scale` is the lattice spacing in nm for regular kinds and the mean
/// spacing for `random-3d`, whose cube has side `scale * n^(1/3)`.
pub fn generate_configuration(
    kind: ConfigKind,
    n: usize,
    scale: f64,
    seed: u64,
    model: InteractionModel,
) -> Result<SpinConfiguration> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid(format!("scale must be positive, got {scale}"));
    }
    let positions = match kind {
        ConfigKind::Chain => (0..n).map(|k| [k as f64 * scale, 0.0, 0.0]).collect(),
        ConfigKind::SquareLattice => square_lattice_sites(n)
            .into_iter()
            .map(|(x, y)| [x as f64 * scale, y as f64 * scale, 0.0])
            .collect(),
        ConfigKind::Circle => {
            let radius = if n == 1 {
                0.0
            } else {
                scale / (2.0 * (std::f64::consts::PI / n as f64).sin())
            };
            (0..n)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [radius * a.cos(), radius * a.sin(), 0.0]
                })
                .collect()
        }
        ConfigKind::Random3d => random_positions(n, scale, seed)?,
    };
    let label = match kind {
        ConfigKind::Chain => "chain",
        ConfigKind::SquareLattice => "square-lattice",
        ConfigKind::Circle => "circle",
        ConfigKind::Random3d => "random-3d",
    };
    let cfg = SpinConfiguration {
        positions_nm: positions,
        gamma_rad_per_s_t: vec![GAMMA_NV; n],
        field_axis: [0.0, 0.0, 1.0],
        model,
        angular_factor: AngularFactor::Cos2,
        label: format!("{label}-n{n}"),
        seed: (kind == ConfigKind::Random3d).then_some(seed),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Integer sites of the square lattice in insertion order: a 2x2 seed
/// block, then shell `k` from `(k,0)` up to `(k,k)` and left to `(0,k)`.
pub fn square_lattice_sites(n: usize) -> Vec<(i64, i64)> {
    let mut sites = Vec::with_capacity(n);
    let mut k = 0i64;
    while sites.len() < n {
        if k == 0 {
            sites.extend([(0, 0), (1, 0), (0, 1), (1, 1)]);
            k = 2;
            continue;
        }
        for y in 0..=k {
            sites.push((k, y));
        }
        for x in (0..k).rev() {
            sites.push((x, k));
        }
        k += 1;
    }
    sites.truncate(n);
    sites
}

fn random_positions(n: usize, scale: f64, seed: u64) -> Result<Vec<[f64; 3]>> {
    let side = scale * (n as f64).cbrt();
    let min_d = MIN_DISTANCE_FRACTION * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RANDOM_RETRIES {
        let pos: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                [rng.gen::<f64>() * side, rng.gen::<f64>() * side, rng.gen::<f64>() * side]
            })
            .collect();
        let ok = (0..n).all(|i| (i + 1..n).all(|j| norm3(&sub3(&pos[i], &pos[j])) >= min_d));
        if ok {
            return Ok(pos);
        }
    }
    Err(Error::Numerical(format!(
        "no random configuration with minimum distance {min_d} nm after {MAX_RANDOM_RETRIES} draws"
    )))
}

pub(crate) fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}
