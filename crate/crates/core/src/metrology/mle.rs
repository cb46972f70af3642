use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ramsey::golden_max;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    /// Shots per trial.
    pub shots: usize,
    pub trials: usize,
    pub seed: u64,
    /// The likelihood is maximized over `[phi0 - w, phi0 + w]`.
    pub half_width: f64,
    /// Coarse scan points before golden-section refinement.
    pub grid_points: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        MleConfig { shots: 10_000, trials: 500, seed: 0, half_width: 0.5, grid_points: 41 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean estimate.
    pub se_mean: f64,
    /// Standard error of the sample variance, `var * sqrt(2 / (trials - 1))`.
    pub se_variance: f64,
    pub estimates: Vec<f64>,
}

/// Monte-Carlo maximum-likelihood estimation of `phi0` from `shots`
/// samples of `family(phi0)`, repeated `trials` times.
pub fn mle_simulate<F>(family: F, phi0: f64, cfg: MleConfig) -> Result<MleResult>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if cfg.shots < 100 {
        return invalid(format!("need at least 100 shots, got {}", cfg.shots));
    }
    if cfg.trials < 2 {
        return invalid("need at least two trials");
    }
    if !(cfg.half_width > 0.0) || cfg.grid_points < 3 {
        return invalid("bracket half width must be positive with at least 3 grid points");
    }
    let p0 = family(phi0)?;
    let total: f64 = p0.iter().sum();
    if p0.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return invalid("family does not return a probability distribution");
    }
    let mut cumulative = Vec::with_capacity(p0.len());
    let mut acc = 0.0;
    for p in &p0 {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let estimates: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            let mut counts = vec![0u64; p0.len()];
            for _ in 0..cfg.shots {
                let u: f64 = rng.gen::<f64>() * acc;
                let k = cumulative.partition_point(|&c| c <= u).min(counts.len() - 1);
                counts[k] += 1;
            }
            maximize_likelihood(&family, &counts, phi0, &cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    let t = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / t;
    let variance = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok(MleResult {
        mean,
        variance,
        se_mean: (variance / t).sqrt(),
        se_variance: variance * (2.0 / (t - 1.0)).sqrt(),
        estimates,
    })
}

fn log_likelihood<F>(family: &F, counts: &[u64], phi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let p = family(phi)?;
    let mut ll = 0.0;
    for (&c, &pk) in counts.iter().zip(&p) {
        if c == 0 {
            continue;
        }
        if pk <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        ll += c as f64 * pk.ln();
    }
    Ok(ll)
}

fn maximize_likelihood<F>(family: &F, counts: &[u64], phi0: f64, cfg: &MleConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let (lo, hi) = (phi0 - cfg.half_width, phi0 + cfg.half_width);
    let g = cfg.grid_points;
    let xs: Vec<f64> = (0..g).map(|k| lo + (hi - lo) * k as f64 / (g - 1) as f64).collect();
    let ls = xs.iter().map(|&x| log_likelihood(family, counts, x)).collect::<Result<Vec<f64>>>()?;
    let (best, lmax) = ls
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (k, v)| if v > a.1 { (k, v) } else { a });
    let lmin = ls.iter().cloned().fold(f64::INFINITY, f64::min);
    if !lmax.is_finite() || (lmax - lmin).abs() <= 1e-12 * lmax.abs().max(1.0) {
        return Err(Error::Numerical("likelihood is flat over the bracket; phase not identifiable".into()));
    }
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(g - 1)];
    golden_max(|x| log_likelihood(family, counts, x), a, b, 1e-12)
}
