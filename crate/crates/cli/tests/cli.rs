use std::path::{Path, PathBuf};
use std::process::Command;

use spinmetro::analysis::{ReferenceKind, single_spin_entropies};
use spinmetro::controllability::{ClosureStrategy, ControlModel};
use spinmetro::metrology::{single_qubit_oracle, MeasurementBasis};
use spinmetro_cli::commands::*;
use spinmetro_cli::config::*;
use spinmetro_cli::record::*;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinmetro"))
}

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.ensemble.n = IntRange::Span([2, 4]);
    c.ensemble.seeds = SeedSpec::Count(3);
    c.cmaes.max_generations = 60;
    c
}

fn without_wall(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

#[test]
fn template_is_the_default() {
    assert_eq!(ExperimentConfig::from_toml(TEMPLATE).unwrap(), ExperimentConfig::default());
    let c = small_config();
    assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
}

#[test]
fn config_errors_name_the_field() {
    let e = ExperimentConfig::from_toml("[ensemble]\nnn = 3\n").unwrap_err();
    assert!(e.contains("nn"), "{e}");
    let e = ExperimentConfig::from_toml("[ensemble]\nn = [4, 2]\n").unwrap_err();
    assert!(e.starts_with("ensemble.n"), "{e}");
    let e = ExperimentConfig::from_toml("[cmaes]\nseed = 4\n").unwrap_err();
    assert!(e.starts_with("cmaes.seed"), "{e}");
    let e = ExperimentConfig::from_toml("[noise]\nreadout_fidelity = 0.2\n").unwrap_err();
    assert!(e.starts_with("noise"), "{e}");
    let e = ExperimentConfig::from_toml("workers = 0\n").unwrap_err();
    assert!(e.starts_with("workers"), "{e}");
    let e = ExperimentConfig::from_toml("[ramsey]\nnu = 0.5\n").unwrap_err();
    assert!(e.starts_with("ramsey.nu"), "{e}");
    let ok = ExperimentConfig::from_toml("[ensemble]\nkind = \"random-3d\"\nseeds = [4, 9]\n").unwrap();
    assert_eq!(ok.ensemble.seeds.values(), vec![4, 9]);
}

#[test]
fn grid_arithmetic_and_seeds() {
    let c = small_config();
    let inst = c.instances();
    assert_eq!(inst.len(), 9);
    let seeds: std::collections::BTreeSet<u64> = inst.iter().map(|i| c.instance_seed(i)).collect();
    assert_eq!(seeds.len(), 9);
    let mut other = c.clone();
    other.seed = 1;
    assert_ne!(c.instance_seed(&inst[0]), other.instance_seed(&inst[0]));
}

#[test]
fn hash_ignores_out_and_workers() {
    let a = small_config();
    let mut b = a.clone();
    b.out = PathBuf::from("elsewhere");
    b.workers = 4;
    assert_eq!(a.hash(), b.hash());
    b.seed = 7;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn optimize_writes_grid_and_resumes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let cfg = small_config();
    let o = cmd_optimize(&cfg, &out, false).unwrap();
    assert_eq!(o, OptimizeOutcome { computed: 9, skipped: 0, failed: 0 });
    let rows: Vec<AggregateRow> = read_csv(&out.join("aggregate.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    let header = std::fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert!(header.starts_with("n,m,seed,cfi,fdd_T,generations,wall_s\n"));
    let summary: Vec<SummaryRow> = read_csv(&out.join("summary.csv")).unwrap();
    assert_eq!(summary.len(), 3);
    assert!(summary.iter().all(|s| s.count == 3));

    for r in &rows {
        let path = records_dir(&out).join(format!("n{}_m{}_s{}.json", r.n, r.m, r.seed));
        let rec: ResultRecord = read_json(&path).unwrap();
        assert_eq!(rec.config.hash(), rec.config_hash);
        assert_eq!(&AggregateRow::from_record(&rec), r);
        assert_eq!(rec.metrics.single_spin_entropies.len(), r.n);
        assert!(rec.finished_at >= rec.started_at);
    }

    let again = cmd_optimize(&cfg, &out, true).unwrap();
    assert_eq!(again, OptimizeOutcome { computed: 0, skipped: 9, failed: 0 });
    assert!(matches!(cmd_optimize(&cfg, &out, false), Err(CliError::Config(_))));
    let mut other = cfg.clone();
    other.seed = 3;
    assert!(matches!(cmd_optimize(&other, &out, true), Err(CliError::Config(_))));
}

#[test]
fn resume_completes_a_partial_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let cfg = small_config();
    cmd_optimize(&cfg, &out, false).unwrap();
    let full = without_wall(&out.join("aggregate.csv"));
    std::fs::remove_file(records_dir(&out).join("n3_m1_s1.json")).unwrap();
    let o = cmd_optimize(&cfg, &out, true).unwrap();
    assert_eq!((o.computed, o.skipped), (1, 8));
    assert_eq!(without_wall(&out.join("aggregate.csv")), full);
}

#[test]
fn determinism_and_worker_independence() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_config();
    cfg.ensemble.kind = spinmetro::ensemble::ConfigKind::Random3d;
    cmd_optimize(&cfg, &dir.path().join("a"), false).unwrap();
    cmd_optimize(&cfg, &dir.path().join("b"), false).unwrap();
    cfg.workers = 3;
    cmd_optimize(&cfg, &dir.path().join("c"), false).unwrap();
    let a = without_wall(&dir.path().join("a/aggregate.csv"));
    assert_eq!(a, without_wall(&dir.path().join("b/aggregate.csv")));
    assert_eq!(a, without_wall(&dir.path().join("c/aggregate.csv")));
    assert_eq!(
        std::fs::read(dir.path().join("a/summary.csv")).unwrap(),
        std::fs::read(dir.path().join("c/summary.csv")).unwrap()
    );
}

#[test]
fn random_ensembles_beat_the_sql() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.ensemble.kind = spinmetro::ensemble::ConfigKind::Random3d;
    cfg.ensemble.n = IntRange::One(4);
    cfg.ensemble.seeds = SeedSpec::Count(5);
    cfg.circuit.m = IntRange::One(3);
    cmd_optimize(&cfg, dir.path(), false).unwrap();
    let s: Vec<SummaryRow> = read_csv(&dir.path().join("summary.csv")).unwrap();
    assert!(s[0].cfi_mean > 4.0, "mean CFI {}", s[0].cfi_mean);
}

#[test]
fn failing_instances_give_partial_exit() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(&cfg_path, "[ensemble]\nmodel = { generic = { j_ising = 1e308, j_heis = 0.0 } }\n").unwrap();
    let out = dir.path().join("out");
    let st = bin().args(["optimize", "--config"]).arg(&cfg_path).arg("--out").arg(&out).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let failures: Vec<InstanceFailure> = read_json(&out.join("failures.json")).unwrap();
    assert_eq!(failures.len(), 1);
    assert!(failures[0].error.contains("non-finite"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    let unk = dir.path().join("u.toml");
    std::fs::write(&unk, "colour = 3\n").unwrap();
    let o = bin().args(["optimize", "--config"]).arg(&unk).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    let o = bin().args(["controllability", "--n", "6"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["analyze", "--record"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generate_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.toml");
    let st = bin().args(["generate-config", "--config"]).arg(&path).status().unwrap();
    assert!(st.success());
    assert_eq!(ExperimentConfig::load(&path).unwrap(), ExperimentConfig::default());
    let st = bin().args(["generate-config", "--config"]).arg(&path).status().unwrap();
    assert_eq!(st.code(), Some(1));
    let out = bin().arg("generate-config").output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), TEMPLATE);
}

#[test]
fn optimize_through_the_binary_with_overrides() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "[cmaes]\nmax_generations = 20\n").unwrap();
    let out = dir.path().join("o");
    let st = bin()
        .args(["optimize", "--workers", "2", "--seed", "5", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let rec: ResultRecord = read_json(&records_dir(&out).join("n2_m1_s0.json")).unwrap();
    assert_eq!(rec.config.seed, 5);
    assert_eq!(rec.config.workers, 2);
    assert_eq!(rec.optimization.seed, rec.config.instance_seed(&rec.instance));
    let st = bin().args(["optimize", "--resume", "--seed", "5", "--config"]).arg(&path).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
}

fn one_record(dir: &Path) -> PathBuf {
    let mut cfg = ExperimentConfig::default();
    cfg.ensemble.n = IntRange::One(3);
    cfg.noise.init_fidelity = 0.95;
    cfg.cmaes.max_generations = 80;
    cmd_optimize(&cfg, &dir.join("run"), false).unwrap();
    records_dir(&dir.join("run")).join("n3_m1_s0.json")
}

#[test]
fn analyze_files_match_library_calls() {
    let dir = TempDir::new().unwrap();
    let rec_path = one_record(dir.path());
    let req = AnalyzeRequest {
        source: StateSource::Record(rec_path.clone()),
        analyses: vec![Analysis::Wigner, Analysis::Entropy, Analysis::Squeezing, Analysis::Cutoff],
        resolution: 6,
        cutoff_hz: vec![],
        out: dir.path().join("an"),
    };
    let files = cmd_analyze(&req).unwrap();
    assert_eq!(files.len(), 5);
    let w: Vec<WignerRow> = read_csv(&dir.path().join("an/wigner.csv")).unwrap();
    assert_eq!(w.len(), 6 * 12);
    let meta: WignerMeta = read_json(&dir.path().join("an/wigner_meta.json")).unwrap();
    assert_eq!((meta.n_theta, meta.n_phi), (6, 12));

    let rec: ResultRecord = read_json(&rec_path).unwrap();
    let state = simulate(&rec.configuration, &rec.params, &rec.config.noise.spec()).unwrap();
    let direct = single_spin_entropies(&state).unwrap();
    let rows: Vec<EntropyRow> = read_csv(&dir.path().join("an/entropy.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.entropy_bits).collect::<Vec<_>>(), direct);
    assert_eq!(direct, rec.metrics.single_spin_entropies);

    let cut: Vec<CutoffRow> = read_csv(&dir.path().join("an/cutoff.csv")).unwrap();
    assert_eq!(cut.len(), 8);
    assert!((cut[0].fidelity - 1.0).abs() < 1e-9, "cutoff below every coupling keeps the state");
}

#[test]
fn clusters_of_a_ghz_state_form_one_block() {
    let dir = TempDir::new().unwrap();
    let req = AnalyzeRequest {
        source: StateSource::Reference { kind: ReferenceKind::GhzZ, n: 4 },
        analyses: vec![Analysis::Clusters, Analysis::Squeezing],
        resolution: 4,
        cutoff_hz: vec![],
        out: dir.path().to_path_buf(),
    };
    cmd_analyze(&req).unwrap();
    let p: spinmetro::analysis::ClusterPartition = read_json(&dir.path().join("clusters.json")).unwrap();
    assert_eq!(p.block_sizes(), vec![4]);
    let sq: SqueezingOutput = read_json(&dir.path().join("squeezing.json")).unwrap();
    assert!(sq.xi2.is_none() && sq.error.is_some());

    let cut = AnalyzeRequest { analyses: vec![Analysis::Cutoff], ..req };
    assert!(matches!(cmd_analyze(&cut), Err(CliError::Config(_))));
}

fn ramsey_request(kind: ReferenceKind, n: usize, ramsey: RamseySection, out: &Path) -> RamseyRequest {
    RamseyRequest {
        source: StateSource::Reference { kind, n },
        basis: Some(MeasurementBasis::FullZ),
        readout_fidelity: None,
        ramsey,
        out: out.to_path_buf(),
    }
}

#[test]
fn ramsey_single_spin_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let section = RamseySection { t2: 2.0, nu: 1.0, t_overhead: 0.0, t_min: 0.05, t_max: 4.0, t_points: 12, phase: 0.0 };
    cmd_ramsey(&ramsey_request(ReferenceKind::Css, 1, section, dir.path())).unwrap();
    let rows: Vec<RamseyRow> = read_csv(&dir.path().join("ramsey.csv")).unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        // exp(-t/T2) = exp(-2 gamma t)
        let (_, cfi) = single_qubit_oracle(0.0, 0.25, r.t_s).unwrap();
        assert!((r.cfi_omega - cfi).abs() < 1e-6 * cfi.max(1.0), "t = {}: {} vs {}", r.t_s, r.cfi_omega, cfi);
        assert!(r.error.is_empty());
    }
}

#[test]
fn ramsey_overhead_optimum() {
    let dir = TempDir::new().unwrap();
    let section = RamseySection { t2: 1.0, nu: 2.0, t_overhead: 1e6, t_min: 0.05, t_max: 2.0, t_points: 40, phase: 0.0 };
    let s = cmd_ramsey(&ramsey_request(ReferenceKind::Css, 2, section, dir.path())).unwrap();
    let want = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s.refined_t_s.unwrap() - want).abs() < 0.01 * want, "{:?}", s.refined_t_s);
    assert!((s.css_optimal_t_s - want).abs() < 1e-12);
    let back: RamseySummary = read_json(&dir.path().join("ramsey_summary.json")).unwrap();
    assert_eq!(back, s);
}

#[test]
fn ghz_peak_beats_css_at_nu_4() {
    let dir = TempDir::new().unwrap();
    let section = RamseySection { t2: 1.0, nu: 4.0, t_overhead: 0.0, t_min: 0.02, t_max: 1.5, t_points: 60, phase: 0.0 };
    let css = cmd_ramsey(&ramsey_request(ReferenceKind::Css, 4, section.clone(), &dir.path().join("c"))).unwrap();
    let ghz = cmd_ramsey(&ramsey_request(ReferenceKind::GhzY, 4, section, &dir.path().join("g"))).unwrap();
    assert!(ghz.best_snr2 > css.best_snr2, "{} vs {}", ghz.best_snr2, css.best_snr2);
}

#[test]
fn phase_bias_matches_oracle_at_equivalent_signal() {
    let dir = TempDir::new().unwrap();
    let phase = 0.4;
    let section = RamseySection { t2: 2.0, nu: 1.0, t_overhead: 0.0, t_min: 0.05, t_max: 4.0, t_points: 12, phase };
    let s = cmd_ramsey(&ramsey_request(ReferenceKind::Css, 1, section, dir.path())).unwrap();
    assert_eq!(s.phase, phase);
    for r in read_csv::<RamseyRow>(&dir.path().join("ramsey.csv")).unwrap() {
        let (_, cfi) = single_qubit_oracle(phase / r.t_s, 0.25, r.t_s).unwrap();
        assert!((r.cfi_omega - cfi).abs() < 1e-6 * cfi.max(1.0), "t = {}: {} vs {}", r.t_s, r.cfi_omega, cfi);
    }
}

#[test]
fn optimized_state_needs_an_operating_phase_under_dephasing() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.ensemble.n = IntRange::One(4);
    cfg.circuit.m = IntRange::One(3);
    cmd_optimize(&cfg, &dir.path().join("run"), false).unwrap();
    let record = records_dir(&dir.path().join("run")).join("n4_m3_s0.json");
    let run = |phase: f64, out: &str| {
        let ramsey = RamseySection { t2: 1.0, nu: 2.0, t_overhead: 0.0, t_min: 0.1, t_max: 0.1, t_points: 1, phase };
        let req = RamseyRequest {
            source: StateSource::Record(record.clone()),
            basis: None,
            readout_fidelity: None,
            ramsey,
            out: dir.path().join(out),
        };
        cmd_ramsey(&req).unwrap().best_snr2 / 0.1
    };
    // CFI_phi of the CSS at t = T2/10, nu = 2 is N exp(-2 (t/T2)^2) ~ 3.92
    let (at_zero, biased) = (run(0.0, "a"), run(0.3, "b"));
    assert!(at_zero < 0.1, "{at_zero}");
    assert!(biased > 10.0, "{biased}");
}

#[test]
fn controllability_reports() {
    let dir = TempDir::new().unwrap();
    let r = cmd_controllability(2, ControlModel::Dipolar, ClosureStrategy::AllPairs, None, Some(dir.path())).unwrap();
    assert_eq!(r.dim_with_identity, 9);
    let back: spinmetro::controllability::ControllabilityReport =
        read_json(&dir.path().join("controllability_n2_dipolar.json")).unwrap();
    assert_eq!(back, r);
    let r = cmd_controllability(3, ControlModel::SymmetricIsing, ClosureStrategy::Generators, None, None).unwrap();
    assert_eq!(r.dimension, 19);
    let r = cmd_controllability(1, ControlModel::SingleQubit, ClosureStrategy::AllPairs, None, None).unwrap();
    assert_eq!(r.dimension, 3);
    assert!(matches!(
        cmd_controllability(6, ControlModel::Dipolar, ClosureStrategy::AllPairs, None, None),
        Err(CliError::Config(_))
    ));
}

#[test]
fn oracle_rows_round_trip() {
    let dir = TempDir::new().unwrap();
    let rows = cmd_oracle(1.0, 0.1, 2.0, 4).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3].t_s, 2.0);
    let path = dir.path().join("o.csv");
    write_csv(&path, &rows).unwrap();
    assert_eq!(read_csv::<OracleRow>(&path).unwrap(), rows);
    assert!(cmd_oracle(0.0, -1.0, 1.0, 3).is_err());
}

#[test]
fn summary_statistics() {
    let row = |seed, cfi| AggregateRow { n: 2, m: 1, seed, cfi, fdd_t: 1.0, generations: 1, wall_s: 0.0 };
    let s = summarize(&[row(0, 1.0), row(1, 2.0), row(2, 3.0)]);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].cfi_mean, 2.0);
    assert!((s[0].cfi_se - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(s[0].fdd_t_se, 0.0);
}
