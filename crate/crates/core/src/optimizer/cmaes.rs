use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// How a coordinate is folded back into its interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Reflect,
    /// Periodic, for angles.
    Wrap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    pub kind: BoundKind,
}

impl Bound {
    pub fn reflect(lo: f64, hi: f64) -> Self {
        Bound { lo, hi, kind: BoundKind::Reflect }
    }

    pub fn wrap(lo: f64, hi: f64) -> Self {
        Bound { lo, hi, kind: BoundKind::Wrap }
    }

    /// Map a unit-box coordinate (any real) into `[lo, hi]` (`[lo, hi)` when wrapping).
    pub fn fold(&self, u: f64) -> f64 {
        let t = match self.kind {
            BoundKind::Wrap => u.rem_euclid(1.0),
            BoundKind::Reflect => {
                let r = u.rem_euclid(2.0);
                if r > 1.0 {
                    2.0 - r
                } else {
                    r
                }
            }
        };
        let x = self.lo + (self.hi - self.lo) * t;
        match self.kind {
            BoundKind::Wrap if x >= self.hi => self.lo,
            _ => x.clamp(self.lo, self.hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            BoundKind::Wrap => x >= self.lo && x < self.hi,
            BoundKind::Reflect => x >= self.lo && x <= self.hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CmaesConfig {
    /// Population size; `4 + floor(3 ln d)` when absent.
    pub population: Option<usize>,
    /// Initial step as a fraction of each box width.
    pub sigma0: f64,
    pub max_generations: usize,
    pub stagnation_window: usize,
    /// Relative improvement of the best cost over the window below which the run stops.
    pub stagnation_tol: f64,
    /// Stop as soon as the best cost reaches this value.
    pub target: Option<f64>,
    /// Stop when the largest sampling standard deviation (unit box) drops below this.
    pub tol_x: f64,
    pub seed: u64,
    /// Independent runs; the best one is returned.
    pub restarts: usize,
    /// Resampling rounds for candidates with non-finite cost.
    pub max_resample: usize,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        CmaesConfig {
            population: None,
            sigma0: 0.3,
            max_generations: 2000,
            stagnation_window: 200,
            stagnation_tol: 1e-8,
            target: None,
            tol_x: 1e-12,
            seed: 0,
            restarts: 1,
            max_resample: 100,
        }
    }
}

impl CmaesConfig {
    pub fn population_for(&self, dim: usize) -> usize {
        self.population.unwrap_or(4 + (3.0 * (dim as f64).ln()).floor() as usize)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return invalid("CMA-ES needs at least one coordinate");
        }
        if self.population_for(dim) < 4 {
            return invalid("population must be at least 4");
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return invalid(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.max_generations == 0 {
            return invalid("max_generations must be positive");
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best cost seen so far (non-increasing).
    pub best_cost: f64,
    /// Best cost within this generation.
    pub generation_best: f64,
    pub mean_cost: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxGenerations,
    Stagnation,
    Target,
    TolX,
    /// Covariance condition number above `1e14`.
    ConditionCov,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub history: Vec<GenerationStats>,
    /// Best parameters, in box coordinates.
    pub theta: Vec<f64>,
    pub best_cost: f64,
    pub evaluations: usize,
    pub generations: usize,
    pub seed: u64,
    pub stop_reason: StopReason,
    pub wall_time_s: f64,
}

const MAX_CONDITION: f64 = 1e14;

struct Params {
    lambda: usize,
    mu: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
}

impl Params {
    fn new(d: usize, lambda: usize) -> Self {
        let n = d as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
        let s: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / s).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
        let cs = (mueff + 2.0) / (n + mueff + 5.0);
        let c1 = 2.0 / ((n + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        Params { lambda, mu, weights, mueff, cc, cs, c1, cmu, damps, chi_n }
    }
}

fn to_box(bounds: &[Bound], y: &DVector<f64>) -> Vec<f64> {
    bounds.iter().zip(y.iter()).map(|(b, &u)| b.fold(u)).collect()
}

/// Minimize `cost` over the box with (mu/mu_w, lambda)-CMA-ES.
///
/// The search runs in unit-box coordinates. Candidates are sampled serially
/// and evaluated in parallel, so results do not depend on the thread count.
/// With `restarts > 1`, run `k` uses seed `seed + k` and the best run is
/// returned with the evaluation count of all runs.
pub fn cmaes_minimize<F>(cost: F, bounds: &[Bound], cfg: &CmaesConfig) -> Result<OptimizationRecord>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate(bounds.len())?;
    for (k, b) in bounds.iter().enumerate() {
        if !(b.lo < b.hi && b.lo.is_finite() && b.hi.is_finite()) {
            return invalid(format!("bound {k} must satisfy lo < hi, got [{}, {}]", b.lo, b.hi));
        }
    }
    let start = Instant::now();
    let mut best: Option<OptimizationRecord> = None;
    let mut evaluations = 0;
    for k in 0..cfg.restarts {
        let rec = single_run(&cost, bounds, cfg, cfg.seed.wrapping_add(k as u64))?;
        evaluations += rec.evaluations;
        if best.as_ref().map_or(true, |b| rec.best_cost < b.best_cost) {
            best = Some(rec);
        }
    }
    let mut rec = best.expect("at least one run");
    if cfg.restarts > 1 {
        rec.evaluations = evaluations;
        rec.wall_time_s = start.elapsed().as_secs_f64();
    }
    Ok(rec)
}

fn single_run<F>(cost: &F, bounds: &[Bound], cfg: &CmaesConfig, seed: u64) -> Result<OptimizationRecord>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let start = Instant::now();
    let d = bounds.len();
    let p = Params::new(d, cfg.population_for(d));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut mean = DVector::from_fn(d, |_, _| rng.gen::<f64>());
    let mut sigma = cfg.sigma0;
    let mut c = DMatrix::<f64>::identity(d, d);
    let mut b = DMatrix::<f64>::identity(d, d);
    let mut diag = DVector::from_element(d, 1.0);
    let mut inv_sqrt_c = DMatrix::<f64>::identity(d, d);
    let mut pc = DVector::zeros(d);
    let mut ps = DVector::zeros(d);

    let mut history = Vec::new();
    let mut best_cost = f64::INFINITY;
    let mut best_theta = to_box(bounds, &mean);
    let mut evaluations = 0;
    let mut stop = StopReason::MaxGenerations;

    for gen in 0..cfg.max_generations {
        let sample = |rng: &mut ChaCha8Rng| {
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            &mean + (&b * diag.component_mul(&z)) * sigma
        };
        let mut ys: Vec<DVector<f64>> = (0..p.lambda).map(|_| sample(&mut rng)).collect();
        let mut xs: Vec<Vec<f64>> = ys.iter().map(|y| to_box(bounds, y)).collect();
        let mut fs: Vec<f64> = xs.par_iter().map(|x| cost(x)).collect();
        evaluations += p.lambda;
        let mut round = 0;
        loop {
            let bad: Vec<usize> = (0..p.lambda).filter(|&i| !fs[i].is_finite()).collect();
            if bad.is_empty() {
                break;
            }
            if round == cfg.max_resample {
                return Err(Error::Optimizer(format!(
                    "cost stayed non-finite after {round} resampling rounds in generation {gen}"
                )));
            }
            for &i in &bad {
                ys[i] = sample(&mut rng);
                xs[i] = to_box(bounds, &ys[i]);
            }
            let redo: Vec<f64> = bad.par_iter().map(|&i| cost(&xs[i])).collect();
            evaluations += bad.len();
            for (&i, f) in bad.iter().zip(redo) {
                fs[i] = f;
            }
            round += 1;
        }

        let mut order: Vec<usize> = (0..p.lambda).collect();
        order.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
        let gen_best = fs[order[0]];
        if gen_best < best_cost {
            best_cost = gen_best;
            best_theta = xs[order[0]].clone();
        }
        history.push(GenerationStats {
            generation: gen,
            best_cost,
            generation_best: gen_best,
            mean_cost: fs.iter().sum::<f64>() / p.lambda as f64,
            sigma,
        });

        let old = mean.clone();
        mean = DVector::zeros(d);
        for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
            mean += &ys[i] * *w;
        }
        let step = (&mean - &old) / sigma;
        ps = &ps * (1.0 - p.cs) + &inv_sqrt_c * &step * (p.cs * (2.0 - p.cs) * p.mueff).sqrt();
        let ps_norm = ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - p.cs).powi(2 * (gen as i32 + 1))).sqrt() / p.chi_n
            < 1.4 + 2.0 / (d as f64 + 1.0);
        let hs = if hsig { 1.0 } else { 0.0 };
        pc = &pc * (1.0 - p.cc) + &step * (hs * (p.cc * (2.0 - p.cc) * p.mueff).sqrt());
        let mut rank_mu = DMatrix::zeros(d, d);
        for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
            let y = (&ys[i] - &old) / sigma;
            rank_mu += &y * y.transpose() * *w;
        }
        c = &c * (1.0 - p.c1 - p.cmu)
            + (&pc * pc.transpose() + &c * ((1.0 - hs) * p.cc * (2.0 - p.cc))) * p.c1
            + rank_mu * p.cmu;
        c = (&c + c.transpose()) * 0.5;
        sigma *= ((p.cs / p.damps) * (ps_norm / p.chi_n - 1.0)).exp();

        let eig = SymmetricEigen::new(c.clone());
        let (lmin, lmax) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
        if !(lmin > 0.0 && lmax / lmin <= MAX_CONDITION) || !sigma.is_finite() {
            stop = StopReason::ConditionCov;
            break;
        }
        b = eig.eigenvectors;
        diag = eig.eigenvalues.map(f64::sqrt);
        inv_sqrt_c = &b * DMatrix::from_diagonal(&diag.map(|s| 1.0 / s)) * b.transpose();

        if cfg.target.is_some_and(|t| best_cost <= t) {
            stop = StopReason::Target;
            break;
        }
        if history.len() > cfg.stagnation_window {
            let then = history[history.len() - 1 - cfg.stagnation_window].best_cost;
            if then - best_cost <= cfg.stagnation_tol * then.abs() {
                stop = StopReason::Stagnation;
                break;
            }
        }
        let max_sd = sigma * c.diagonal().iter().cloned().fold(0.0, f64::max).sqrt();
        if max_sd < cfg.tol_x {
            stop = StopReason::TolX;
            break;
        }
    }
    Ok(OptimizationRecord {
        generations: history.len(),
        history,
        theta: best_theta,
        best_cost,
        evaluations,
        seed,
        stop_reason: stop,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
