use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinmetro::analysis::{
    cluster_partition, cutoff_fidelity, reference_state, single_spin_entropies, squeezing_parameter,
    wigner_distribution, ReferenceKind, DEFAULT_CLUSTER_THRESHOLD, MAX_CLUSTER_SPINS,
};
use spinmetro::controllability::{controllability_report, ClosureOptions, ClosureStrategy, ControlModel};
use spinmetro::engine::{apply_entangler_noisy, initial_state, CircuitParams, PrepNoiseSpec, QuantumState, ramsey_phase};
use spinmetro::ensemble::{build_hamiltonian, coupling_matrix, generate_configuration, SpinConfiguration};
use spinmetro::metrology::{
    css_optimal_time, ghz_optimal_time, optimal_ramsey_time, ramsey_point, single_qubit_oracle, MeasurementBasis,
};
use spinmetro::optimizer::optimize_entangler;

use crate::config::{ExperimentConfig, Instance, RamseySection};
use crate::record::{
    read_json, summarize, write_csv, write_json, AggregateRow, DerivedMetrics, ResultRecord,
};

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or input (exit 1).
    Config(String),
    /// Some instances or grid points failed (exit 2).
    Partial { failed: usize, total: usize },
    /// Unexpected failure (exit 3).
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Partial { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Partial { failed, total } => write!(f, "{failed} of {total} items failed"),
            CliError::Internal(e) => write!(f, "internal error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(CliError::Internal)
}

/// Noisy entangler output for a recorded circuit.
pub fn simulate(configuration: &SpinConfiguration, params: &CircuitParams, noise: &PrepNoiseSpec) -> spinmetro::Result<QuantumState> {
    let input = initial_state(configuration.n_spins(), noise.init_fidelity)?;
    if params.m == 0 {
        return Ok(input);
    }
    let h = build_hamiltonian(&coupling_matrix(configuration)?, configuration.model);
    apply_entangler_noisy(params, &h, &input, noise.gamma_z())
}

fn run_instance(cfg: &ExperimentConfig, hash: &str, inst: Instance) -> anyhow::Result<ResultRecord> {
    let started_at = unix_now();
    let e = &cfg.ensemble;
    let configuration = generate_configuration(e.kind, inst.n, e.scale_nm, inst.config_seed, e.model)?;
    let mut cma = cfg.cmaes.clone();
    cma.seed = cfg.instance_seed(&inst);
    let noise = cfg.noise.spec();
    let opt = optimize_entangler(&configuration, inst.m, cfg.circuit.basis, &noise, &cma)?;
    let state = simulate(&configuration, &opt.params, &noise)?;
    let cluster_sizes = if inst.n <= MAX_CLUSTER_SPINS {
        cluster_partition(&state, DEFAULT_CLUSTER_THRESHOLD)?.block_sizes()
    } else {
        Vec::new()
    };
    let metrics = DerivedMetrics {
        cfi: opt.cfi(),
        fdd_t: opt.fdd_t,
        f_dd_hz: opt.f_dd_hz,
        prep_time_s: opt.params.total_time(),
        single_spin_entropies: single_spin_entropies(&state)?,
        cluster_sizes,
        squeezing_xi2: squeezing_parameter(&state).ok(),
    };
    Ok(ResultRecord {
        config_hash: hash.to_string(),
        config: cfg.clone(),
        instance: inst,
        configuration,
        params: opt.params,
        optimization: opt.record,
        metrics,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: unix_now(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub instance: Instance,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimizeOutcome {
    pub computed: usize,
    pub skipped: usize,
    pub failed: usize,
}

pub fn records_dir(out: &Path) -> PathBuf {
    out.join("records")
}

/// Run the `(n, m, seed)` grid, writing one record per instance, then
/// `aggregate.csv` and `summary.csv` over all completed instances.
///
/// Records are never rewritten: an existing record is reused when `resume`
/// is set and its config hash matches, and is an error otherwise.
pub fn cmd_optimize(cfg: &ExperimentConfig, out: &Path, resume: bool) -> CliResult<OptimizeOutcome> {
    cfg.validate().map_err(config_err)?;
    let hash = cfg.hash();
    let rec_dir = records_dir(out);
    create_dir(&rec_dir)?;
    let instances = cfg.instances();
    let mut pending = Vec::new();
    let mut skipped = 0;
    for inst in &instances {
        let path = rec_dir.join(format!("{}.json", inst.file_stem()));
        if !path.exists() {
            pending.push(*inst);
            continue;
        }
        let existing: ResultRecord = read_json(&path).map_err(|e| config_err(format!("{e:#}")))?;
        if existing.config_hash != hash {
            return Err(config_err(format!(
                "{} belongs to a different configuration (hash {}); use another --out",
                path.display(),
                existing.config_hash
            )));
        }
        if !resume {
            return Err(config_err(format!("{} already exists; pass --resume to continue the run", path.display())));
        }
        skipped += 1;
    }
    std::fs::write(out.join("config.toml"), cfg.to_toml()).context("writing config.toml")?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Internal(anyhow!(e)))?;
    let total = pending.len();
    let results: Vec<(Instance, anyhow::Result<()>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&inst| {
                let res = run_instance(cfg, &hash, inst).and_then(|r| {
                    eprintln!(
                        "n={} m={} seed={}: cfi={:.6} fdd_T={:.4} generations={}",
                        inst.n, inst.m, inst.config_seed, r.metrics.cfi, r.metrics.fdd_t, r.optimization.generations
                    );
                    write_json(&rec_dir.join(format!("{}.json", inst.file_stem())), &r)
                });
                (inst, res)
            })
            .collect()
    });
    let failures: Vec<InstanceFailure> = results
        .iter()
        .filter_map(|(inst, r)| r.as_ref().err().map(|e| InstanceFailure { instance: *inst, error: format!("{e:#}") }))
        .collect();
    for f in &failures {
        eprintln!("n={} m={} seed={}: failed: {}", f.instance.n, f.instance.m, f.instance.config_seed, f.error);
    }
    let failures_path = out.join("failures.json");
    if failures.is_empty() {
        if failures_path.exists() {
            std::fs::remove_file(&failures_path).context("removing stale failures.json")?;
        }
    } else {
        write_json(&failures_path, &failures)?;
    }

    let mut rows = Vec::new();
    for inst in &instances {
        let path = rec_dir.join(format!("{}.json", inst.file_stem()));
        if path.exists() {
            let r: ResultRecord = read_json(&path)?;
            rows.push(AggregateRow::from_record(&r));
        }
    }
    write_csv(&out.join("aggregate.csv"), &rows)?;
    write_csv(&out.join("summary.csv"), &summarize(&rows))?;

    let outcome = OptimizeOutcome { computed: total - failures.len(), skipped, failed: failures.len() };
    if outcome.failed > 0 {
        return Err(CliError::Partial { failed: outcome.failed, total: instances.len() });
    }
    Ok(outcome)
}

/// State to analyze: a recorded optimization or a reference state.
#[derive(Clone, Debug)]
pub enum StateSource {
    Record(PathBuf),
    Reference { kind: ReferenceKind, n: usize },
}

struct LoadedState {
    state: QuantumState,
    record: Option<ResultRecord>,
}

fn load_state(source: &StateSource) -> CliResult<LoadedState> {
    match source {
        StateSource::Record(path) => {
            if !path.exists() {
                return Err(config_err(format!("record {} does not exist", path.display())));
            }
            let record: ResultRecord = read_json(path).map_err(|e| config_err(format!("{e:#}")))?;
            let state = simulate(&record.configuration, &record.params, &record.config.noise.spec())
                .map_err(|e| CliError::Internal(e.into()))?;
            Ok(LoadedState { state, record: Some(record) })
        }
        StateSource::Reference { kind, n } => {
            let state = reference_state(*kind, *n).map_err(config_err)?;
            Ok(LoadedState { state, record: None })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    Wigner,
    Entropy,
    Clusters,
    Squeezing,
    Cutoff,
}

#[derive(Clone, Debug)]
pub struct AnalyzeRequest {
    pub source: StateSource,
    pub analyses: Vec<Analysis>,
    /// Polar points of the Wigner grid; the azimuthal count is twice this.
    pub resolution: usize,
    /// Cutoff frequencies in Hz; empty means 8 log-spaced points from
    /// `f_dd / 10` to `10 f_dd`.
    pub cutoff_hz: Vec<f64>,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WignerRow {
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub w: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WignerMeta {
    pub n_theta: usize,
    pub n_phi: usize,
    pub integral: f64,
    pub symmetric_trace: f64,
    pub projection: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntropyRow {
    pub spin: usize,
    pub entropy_bits: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SqueezingOutput {
    pub xi2: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CutoffRow {
    pub f_cutoff_hz: f64,
    pub fidelity: f64,
}

/// Re-simulate the state and write one file per requested analysis.
/// Returns the paths written.
pub fn cmd_analyze(req: &AnalyzeRequest) -> CliResult<Vec<PathBuf>> {
    if req.resolution < 2 {
        return Err(config_err("resolution must be at least 2"));
    }
    let loaded = load_state(&req.source)?;
    let state = &loaded.state;
    create_dir(&req.out)?;
    let mut written = Vec::new();
    for a in &req.analyses {
        match a {
            Analysis::Wigner => {
                let g = wigner_distribution(state, req.resolution, 2 * req.resolution).map_err(|e| CliError::Internal(e.into()))?;
                let mut rows = Vec::with_capacity(g.values.len());
                for (i, &th) in g.theta.iter().enumerate() {
                    for (j, &ph) in g.phi.iter().enumerate() {
                        rows.push(WignerRow { theta_rad: th, phi_rad: ph, w: g.value(i, j) });
                    }
                }
                let path = req.out.join("wigner.csv");
                write_csv(&path, &rows)?;
                written.push(path);
                let meta = WignerMeta {
                    n_theta: g.theta.len(),
                    n_phi: g.phi.len(),
                    integral: g.integral(),
                    symmetric_trace: g.symmetric_trace,
                    projection: g.projection.clone(),
                };
                let path = req.out.join("wigner_meta.json");
                write_json(&path, &meta)?;
                written.push(path);
            }
            Analysis::Entropy => {
                let s = single_spin_entropies(state).map_err(|e| CliError::Internal(e.into()))?;
                let rows: Vec<EntropyRow> = s.into_iter().enumerate().map(|(spin, entropy_bits)| EntropyRow { spin, entropy_bits }).collect();
                let path = req.out.join("entropy.csv");
                write_csv(&path, &rows)?;
                written.push(path);
            }
            Analysis::Clusters => {
                let p = cluster_partition(state, DEFAULT_CLUSTER_THRESHOLD).map_err(config_err)?;
                let path = req.out.join("clusters.json");
                write_json(&path, &p)?;
                written.push(path);
            }
            Analysis::Squeezing => {
                let out = match squeezing_parameter(state) {
                    Ok(x) => SqueezingOutput { xi2: Some(x), error: None },
                    Err(e) => SqueezingOutput { xi2: None, error: Some(e.to_string()) },
                };
                let path = req.out.join("squeezing.json");
                write_json(&path, &out)?;
                written.push(path);
            }
            Analysis::Cutoff => {
                let Some(record) = &loaded.record else {
                    return Err(config_err("the cutoff analysis needs a record"));
                };
                let freqs = if req.cutoff_hz.is_empty() {
                    let f = record.metrics.f_dd_hz;
                    (0..8).map(|k| f * 10f64.powf(-1.0 + 2.0 * k as f64 / 7.0)).collect()
                } else {
                    req.cutoff_hz.clone()
                };
                let mut rows = Vec::with_capacity(freqs.len());
                for f in freqs {
                    let fidelity = cutoff_fidelity(&record.configuration, &record.params, f).map_err(|e| CliError::Internal(e.into()))?;
                    rows.push(CutoffRow { f_cutoff_hz: f, fidelity });
                }
                let path = req.out.join("cutoff.csv");
                write_csv(&path, &rows)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[derive(Clone, Debug)]
pub struct RamseyRequest {
    pub source: StateSource,
    /// Readout basis and fidelity; a record supplies its own unless set.
    pub basis: Option<MeasurementBasis>,
    pub readout_fidelity: Option<f64>,
    pub ramsey: RamseySection,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RamseyRow {
    pub t_s: f64,
    pub cfi_omega: f64,
    pub cfi_omega_per_t: f64,
    pub snr2_overhead: f64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RamseySummary {
    pub n: usize,
    pub t2: f64,
    pub nu: f64,
    pub t_overhead: f64,
    pub phase: f64,
    pub best_t_s: f64,
    pub best_snr2: f64,
    /// Golden-section refinement over `[t_min, t_max]`.
    pub refined_t_s: Option<f64>,
    pub refined_snr2: Option<f64>,
    /// Closed-form optima when the overhead dominates.
    pub css_optimal_t_s: f64,
    pub ghz_optimal_t_s: f64,
    pub failed_points: usize,
}

/// Ramsey curves `CFI_omega / t` and `CFI_omega / (t + t_oh)` over the
/// configured time grid, plus optima.
pub fn cmd_ramsey(req: &RamseyRequest) -> CliResult<RamseySummary> {
    let r = &req.ramsey;
    let mut probe = ExperimentConfig::default();
    probe.ramsey = r.clone();
    probe.validate().map_err(config_err)?;
    let loaded = load_state(&req.source)?;
    let biased = ramsey_phase(&loaded.state, r.phase);
    let state = &biased;
    let (basis, rf) = match &loaded.record {
        Some(rec) => (
            req.basis.unwrap_or(rec.config.circuit.basis),
            req.readout_fidelity.unwrap_or(rec.config.noise.readout_fidelity),
        ),
        None => (req.basis.unwrap_or(MeasurementBasis::FullZ), req.readout_fidelity.unwrap_or(1.0)),
    };
    if !(0.5..=1.0).contains(&rf) {
        return Err(config_err(format!("readout fidelity {rf} outside [0.5, 1]")));
    }
    let noise = r.noise();
    let rows: Vec<RamseyRow> = r
        .grid()
        .par_iter()
        .map(|&t| match ramsey_point(state, basis, rf, 0.0, noise, t) {
            Ok(p) => RamseyRow {
                t_s: t,
                cfi_omega: p.cfi_omega,
                cfi_omega_per_t: p.cfi_omega / t,
                snr2_overhead: p.cfi_omega / (t + r.t_overhead),
                error: String::new(),
            },
            Err(e) => RamseyRow { t_s: t, cfi_omega: f64::NAN, cfi_omega_per_t: f64::NAN, snr2_overhead: f64::NAN, error: e.to_string() },
        })
        .collect();
    create_dir(&req.out)?;
    write_csv(&req.out.join("ramsey.csv"), &rows)?;
    let failed_points = rows.iter().filter(|row| !row.error.is_empty()).count();
    let best = rows
        .iter()
        .filter(|row| row.error.is_empty())
        .max_by(|a, b| a.snr2_overhead.total_cmp(&b.snr2_overhead));
    let (best_t_s, best_snr2) = best.map_or((f64::NAN, f64::NAN), |row| (row.t_s, row.snr2_overhead));
    let refined = if r.t_points > 1 {
        optimal_ramsey_time(state, basis, rf, noise, r.t_overhead, r.t_min, r.t_max).ok()
    } else {
        None
    };
    let n = state.n_spins();
    let summary = RamseySummary {
        n,
        t2: r.t2,
        nu: r.nu,
        t_overhead: r.t_overhead,
        phase: r.phase,
        best_t_s,
        best_snr2,
        refined_t_s: refined.map(|x| x.0),
        refined_snr2: refined.map(|x| x.1),
        css_optimal_t_s: css_optimal_time(r.t2, r.nu),
        ghz_optimal_t_s: ghz_optimal_time(r.t2, r.nu, n),
        failed_points,
    };
    write_json(&req.out.join("ramsey_summary.json"), &summary)?;
    if failed_points > 0 {
        return Err(CliError::Partial { failed: failed_points, total: rows.len() });
    }
    Ok(summary)
}

/// Lie closure report for a control model, written as JSON.
pub fn cmd_controllability(
    n: usize,
    model: ControlModel,
    strategy: ClosureStrategy,
    max_rounds: Option<usize>,
    out: Option<&Path>,
) -> CliResult<spinmetro::controllability::ControllabilityReport> {
    if n == 0 || n > 5 {
        return Err(config_err(format!("n = {n} is outside 1..=5")));
    }
    let opts = ClosureOptions { strategy, max_rounds, ..Default::default() };
    let report = controllability_report(model, n, &opts).map_err(config_err)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join(format!("controllability_n{n}_{}.json", report.model)), &report)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleRow {
    pub t_s: f64,
    pub p0: f64,
    pub cfi_omega: f64,
}

/// Single-qubit Ramsey closed forms on `t_points` times in `(0, t_max]`.
pub fn cmd_oracle(omega: f64, gamma: f64, t_max: f64, t_points: usize) -> CliResult<Vec<OracleRow>> {
    if !(t_max > 0.0) || t_points == 0 {
        return Err(config_err("need t_max > 0 and t_points >= 1"));
    }
    (1..=t_points)
        .map(|k| {
            let t = t_max * k as f64 / t_points as f64;
            let (p0, cfi_omega) = single_qubit_oracle(omega, gamma, t).map_err(config_err)?;
            Ok(OracleRow { t_s: t, p0, cfi_omega })
        })
        .collect()
}
