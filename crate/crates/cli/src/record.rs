use std::path::Path;

use anyhow::{Context, Result};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use spinmetro::engine::CircuitParams;
use spinmetro::ensemble::SpinConfiguration;
use spinmetro::optimizer::OptimizationRecord;

use crate::config::{ExperimentConfig, Instance};

/// Quantities computed on the optimized state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedMetrics {
    pub cfi: f64,
    pub fdd_t: f64,
    pub f_dd_hz: f64,
    /// Preparation time `sum (tau + tau')` in s.
    pub prep_time_s: f64,
    pub single_spin_entropies: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    /// Wineland parameter; absent when `<J_x>` vanishes.
    pub squeezing_xi2: Option<f64>,
}

/// One optimized instance. The config hash is recomputable from `config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub configuration: SpinConfiguration,
    pub params: CircuitParams,
    pub optimization: OptimizationRecord,
    pub metrics: DerivedMetrics,
    pub software_version: String,
    /// Unix time in s.
    pub started_at: f64,
    pub finished_at: f64,
}

/// Row of `aggregate.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub cfi: f64,
    #[serde(rename = "fdd_T")]
    pub fdd_t: f64,
    pub generations: usize,
    pub wall_s: f64,
}

impl AggregateRow {
    pub fn from_record(r: &ResultRecord) -> Self {
        AggregateRow {
            n: r.instance.n,
            m: r.instance.m,
            seed: r.instance.config_seed,
            cfi: r.metrics.cfi,
            fdd_t: r.metrics.fdd_t,
            generations: r.optimization.generations,
            wall_s: r.optimization.wall_time_s,
        }
    }
}

/// Row of `summary.csv`: mean and standard error over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub cfi_mean: f64,
    pub cfi_se: f64,
    #[serde(rename = "fdd_T_mean")]
    pub fdd_t_mean: f64,
    #[serde(rename = "fdd_T_se")]
    pub fdd_t_se: f64,
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    let mean = x.iter().sum::<f64>() / k;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Group rows by `(n, m)` in order of first appearance.
pub fn summarize(rows: &[AggregateRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.n, r.m)) {
            keys.push((r.n, r.m));
        }
    }
    keys.into_iter()
        .map(|(n, m)| {
            let group: Vec<&AggregateRow> = rows.iter().filter(|r| r.n == n && r.m == m).collect();
            let (cfi_mean, cfi_se) = mean_se(&group.iter().map(|r| r.cfi).collect::<Vec<_>>());
            let (fdd_t_mean, fdd_t_se) = mean_se(&group.iter().map(|r| r.fdd_t).collect::<Vec<_>>());
            SummaryRow { n, m, count: group.len(), cfi_mean, cfi_se, fdd_t_mean, fdd_t_se }
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| row.with_context(|| format!("parsing {}", path.display()))).collect()
}
