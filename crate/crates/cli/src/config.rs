use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinmetro::engine::PrepNoiseSpec;
use spinmetro::ensemble::{ConfigKind, InteractionModel};
use spinmetro::metrology::{MeasurementBasis, RamseyNoise};
use spinmetro::optimizer::CmaesConfig;

/// A single value or an inclusive `[lo, hi]` range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntRange {
    One(usize),
    Span([usize; 2]),
}

impl IntRange {
    pub fn values(&self) -> Vec<usize> {
        match *self {
            IntRange::One(v) => vec![v],
            IntRange::Span([lo, hi]) => (lo..=hi).collect(),
        }
    }
}

/// A number of configuration seeds `0..k` or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn values(&self) -> Vec<u64> {
        match self {
            SeedSpec::Count(k) => (0..*k).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub kind: ConfigKind,
    pub n: IntRange,
    /// Lattice spacing, or mean spacing for random-3d, in nm.
    pub scale_nm: f64,
    /// Configuration seeds. They place random-3d spins and enter the
    /// optimizer seed for every kind.
    pub seeds: SeedSpec,
    pub model: InteractionModel,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            kind: ConfigKind::Chain,
            n: IntRange::One(2),
            scale_nm: 10.0,
            seeds: SeedSpec::Count(1),
            model: InteractionModel::DipolarSpinHalf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub m: IntRange,
    pub basis: MeasurementBasis,
}

impl Default for CircuitSection {
    fn default() -> Self {
        CircuitSection { m: IntRange::One(1), basis: MeasurementBasis::FullZ }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub init_fidelity: f64,
    pub readout_fidelity: f64,
    /// Dephasing time during the entangler in s; absent means noiseless.
    pub t2_prep: Option<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { init_fidelity: 1.0, readout_fidelity: 1.0, t2_prep: None }
    }
}

impl NoiseSection {
    pub fn spec(&self) -> PrepNoiseSpec {
        PrepNoiseSpec {
            init_fidelity: self.init_fidelity,
            t2_prep: self.t2_prep,
            readout_fidelity: self.readout_fidelity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RamseySection {
    /// Coherence time of the interrogation in s.
    pub t2: f64,
    /// Stretch exponent of `exp(-(t/T2)^nu)`.
    pub nu: f64,
    /// Dead time per shot in s.
    pub t_overhead: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// Operating phase in rad added before the signal accumulation.
    /// States whose Fisher information comes from vanishing outcome
    /// probabilities lose it to dephasing at phase 0.
    pub phase: f64,
}

impl Default for RamseySection {
    fn default() -> Self {
        RamseySection { t2: 1e-3, nu: 1.0, t_overhead: 0.0, t_min: 1e-5, t_max: 2e-3, t_points: 50, phase: 0.0 }
    }
}

impl RamseySection {
    pub fn noise(&self) -> RamseyNoise {
        RamseyNoise { t2: self.t2, nu: self.nu }
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.t_points == 1 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / (self.t_points - 1) as f64;
        (0..self.t_points).map(|k| self.t_min + step * k as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master seed; each instance draws its optimizer seed from
    /// (seed, n, m, configuration seed).
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub ensemble: EnsembleSection,
    pub circuit: CircuitSection,
    pub noise: NoiseSection,
    pub ramsey: RamseySection,
    /// `cmaes.seed` must stay 0; instance seeds are derived.
    pub cmaes: CmaesConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            workers: 1,
            out: PathBuf::from("results"),
            ensemble: EnsembleSection::default(),
            circuit: CircuitSection::default(),
            noise: NoiseSection::default(),
            ramsey: RamseySection::default(),
            cmaes: CmaesConfig::default(),
        }
    }
}

/// Grid point of an optimization sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub config_seed: u64,
}

impl Instance {
    pub fn file_stem(&self) -> String {
        format!("n{}_m{}_s{}", self.n, self.m, self.config_seed)
    }
}

fn field_err<T>(field: &str, msg: impl std::fmt::Display) -> Result<T, String> {
    Err(format!("{field}: {msg}"))
}

fn check_range(field: &str, r: &IntRange, min: usize) -> Result<(), String> {
    match *r {
        IntRange::One(v) if v < min => field_err(field, format!("must be at least {min}, got {v}")),
        IntRange::Span([lo, hi]) if lo > hi => field_err(field, format!("range [{lo}, {hi}] is empty")),
        IntRange::Span([lo, _]) if lo < min => field_err(field, format!("must be at least {min}, got {lo}")),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Check ranges and values; the error names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        if self.workers == 0 {
            return field_err("workers", "must be at least 1");
        }
        check_range("ensemble.n", &self.ensemble.n, 2)?;
        if self.ensemble.n.values().iter().any(|&n| n > 12) {
            return field_err("ensemble.n", "at most 12 spins are supported");
        }
        if !(self.ensemble.scale_nm > 0.0 && self.ensemble.scale_nm.is_finite()) {
            return field_err("ensemble.scale_nm", "must be positive");
        }
        if self.ensemble.seeds.values().is_empty() {
            return field_err("ensemble.seeds", "no configuration seeds");
        }
        check_range("circuit.m", &self.circuit.m, 0)?;
        self.noise.spec().validate().or_else(|e| field_err("noise", e))?;
        let r = &self.ramsey;
        if !(r.t2 > 0.0) {
            return field_err("ramsey.t2", "must be positive");
        }
        if !(r.nu >= 1.0) {
            return field_err("ramsey.nu", "must be at least 1");
        }
        if !(r.t_overhead >= 0.0) {
            return field_err("ramsey.t_overhead", "must be non-negative");
        }
        if !r.phase.is_finite() {
            return field_err("ramsey.phase", "must be finite");
        }
        if !(r.t_min > 0.0 && r.t_max >= r.t_min) || r.t_points == 0 || (r.t_points > 1 && r.t_max == r.t_min) {
            return field_err("ramsey", "need 0 < t_min < t_max and t_points >= 1");
        }
        if self.cmaes.seed != 0 {
            return field_err("cmaes.seed", "instance seeds are derived from the top-level seed; leave this at 0");
        }
        self.cmaes.validate(3).or_else(|e| field_err("cmaes", e))?;
        Ok(())
    }

    /// Instances in sweep order.
    pub fn instances(&self) -> Vec<Instance> {
        let mut out = Vec::new();
        for n in self.ensemble.n.values() {
            for m in self.circuit.m.values() {
                for config_seed in self.ensemble.seeds.values() {
                    out.push(Instance { n, m, config_seed });
                }
            }
        }
        out
    }

    /// Hex SHA-256 of the canonical JSON of the fields that affect results
    /// (`out` and `workers` are excluded).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.workers = 0;
        let json = serde_json::to_string(&c).expect("config serializes to JSON");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Optimizer seed of one instance.
    pub fn instance_seed(&self, inst: &Instance) -> u64 {
        let mut h = Sha256::new();
        for v in [self.seed, inst.n as u64, inst.m as u64, inst.config_seed] {
            h.update(v.to_le_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }
}

/// Annotated default configuration written by `generate-config`.
pub const TEMPLATE: &str = r#"# Experiment configuration. Units: lengths nm, frequencies Hz, times s, angles rad.

# Master seed for the per-instance optimizer streams.
seed = 0
# Worker threads; results do not depend on this.
workers = 1
# Output directory (overridden by --out).
out = "results"

[ensemble]
# chain | square-lattice | circle | random-3d
kind = "chain"
# Number of spins: a single value or an inclusive range [lo, hi].
n = 2
scale_nm = 10.0
# A count k (seeds 0..k) or an explicit list such as [3, 7].
seeds = 1
# dipolar-spin-half | nv-effective | ising
model = "dipolar-spin-half"

[circuit]
# Layers: a single value or an inclusive range [lo, hi].
m = 1
# full-z | total-jz | parity
basis = "full-z"

[noise]
init_fidelity = 1.0
readout_fidelity = 1.0
# t2_prep = 1e-3

[ramsey]
t2 = 1e-3
nu = 1.0
t_overhead = 0.0
t_min = 1e-5
t_max = 2e-3
t_points = 50
# Operating phase in rad; optimized states usually need a small offset under dephasing.
phase = 0.0

[cmaes]
sigma0 = 0.3
max_generations = 2000
stagnation_window = 200
stagnation_tol = 1e-8
tol_x = 1e-12
seed = 0
restarts = 1
max_resample = 100
# population = 12
# target = -4.0
"#;
