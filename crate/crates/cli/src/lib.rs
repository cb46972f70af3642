//! Batch driver: declarative experiment configs, seeded sweeps and
//! persistent records.

pub mod commands;
pub mod config;
pub mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use spinmetro::analysis::ReferenceKind;
use spinmetro::controllability::{ClosureStrategy, ControlModel};
use spinmetro::metrology::MeasurementBasis;

pub use commands::CliError;
use commands::{Analysis, AnalyzeRequest, RamseyRequest, StateSource};
use config::{ExperimentConfig, RamseySection, TEMPLATE};

#[derive(Debug, Parser)]
#[command(
    name = "spinmetro",
    version,
    about = "Variational metrological state preparation in dipolar spin ensembles",
    after_help = "Units: lengths nm, frequencies Hz, times s, angles rad.\n\
                  Exit codes: 0 success, 1 configuration error, 2 partial failure, 3 internal error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn parse_reference(s: &str) -> Result<ReferenceKind, String> {
    s.parse().map_err(|e: spinmetro::Error| e.to_string())
}

fn parse_basis(s: &str) -> Result<MeasurementBasis, String> {
    s.parse().map_err(|e: spinmetro::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<ControlModel, String> {
    s.parse().map_err(|e: spinmetro::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<ClosureStrategy, String> {
    match s {
        "all-pairs" => Ok(ClosureStrategy::AllPairs),
        "generators" => Ok(ClosureStrategy::Generators),
        other => Err(format!("unknown strategy '{other}' (all-pairs, generators)")),
    }
}

/// Where the analyzed state comes from.
#[derive(Debug, clap::Args)]
pub struct SourceArgs {
    /// Result record JSON written by `optimize`.
    #[arg(long, conflicts_with = "reference")]
    pub record: Option<PathBuf>,
    /// Reference state: css, ghz-x, ghz-y, ghz-z, dicke.
    #[arg(long, value_parser = parse_reference, requires = "n")]
    pub reference: Option<ReferenceKind>,
    /// Spin count of the reference state.
    #[arg(long)]
    pub n: Option<usize>,
}

impl SourceArgs {
    fn source(&self) -> Result<StateSource, CliError> {
        match (&self.record, self.reference, self.n) {
            (Some(p), _, _) => Ok(StateSource::Record(p.clone())),
            (None, Some(kind), Some(n)) => Ok(StateSource::Reference { kind, n }),
            _ => Err(CliError::Config("give --record or --reference with --n".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an annotated default configuration.
    GenerateConfig {
        /// Destination file; stdout when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Optimize entanglers over the configured (n, m, seed) grid.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides `workers` in the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip instances already recorded under the same config hash.
        #[arg(long)]
        resume: bool,
    },
    /// Re-simulate a state and write analysis files.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_delimiter = ',', default_value = "wigner,entropy,clusters,squeezing")]
        analyses: Vec<Analysis>,
        /// Polar points of the Wigner grid (azimuthal points are twice this).
        #[arg(long, default_value_t = 24)]
        resolution: usize,
        /// Cutoff frequencies in Hz for the cutoff analysis.
        #[arg(long, value_delimiter = ',')]
        cutoff_hz: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Ramsey CFI and SNR^2 curves under non-Markovian dephasing.
    Ramsey {
        #[command(flatten)]
        source: SourceArgs,
        /// Take the [ramsey] table from this config; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        t2: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        t_overhead: Option<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        t_points: Option<usize>,
        /// Operating phase in rad.
        #[arg(long, allow_hyphen_values = true)]
        phase: Option<f64>,
        /// full-z, total-jz or parity.
        #[arg(long, value_parser = parse_basis)]
        basis: Option<MeasurementBasis>,
        /// Readout fidelity in [0.5, 1].
        #[arg(long)]
        rf: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Dynamical Lie algebra dimension of a globally driven spin system.
    Controllability {
        #[arg(long)]
        n: usize,
        /// dipolar, dipolar-chain, symmetric-ising or single-qubit.
        #[arg(long, value_parser = parse_model, default_value = "dipolar")]
        model: ControlModel,
        /// all-pairs or generators.
        #[arg(long, value_parser = parse_strategy, default_value = "all-pairs")]
        strategy: ClosureStrategy,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-qubit Ramsey closed forms P0(t) and CFI_omega(t).
    Oracle {
        /// Signal in rad/s.
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        /// Dephasing rate in 1/s.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 10)]
        t_points: usize,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn io_err(e: std::io::Error, what: &str) -> CliError {
    CliError::Internal(anyhow::anyhow!("{what}: {e}"))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenerateConfig { config, force } => match config {
            Some(path) => {
                if path.exists() && !force {
                    return Err(CliError::Config(format!("{} exists; pass --force to overwrite", path.display())));
                }
                std::fs::write(&path, TEMPLATE).map_err(|e| io_err(e, "writing config"))
            }
            None => {
                print!("{TEMPLATE}");
                Ok(())
            }
        },
        Command::Optimize { config, out, workers, seed, resume } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(CliError::Config)?;
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = cfg.out.clone();
            let o = commands::cmd_optimize(&cfg, &out, resume)?;
            eprintln!("{} computed, {} reused; results in {}", o.computed, o.skipped, out.display());
            Ok(())
        }
        Command::Analyze { source, analyses, resolution, cutoff_hz, out } => {
            let req = AnalyzeRequest { source: source.source()?, analyses, resolution, cutoff_hz, out };
            for p in commands::cmd_analyze(&req)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Ramsey { source, config, t2, nu, t_overhead, t_min, t_max, t_points, phase, basis, rf, out } => {
            let mut ramsey = match config {
                Some(path) => ExperimentConfig::load(&path).map_err(CliError::Config)?.ramsey,
                None => RamseySection::default(),
            };
            ramsey.t2 = t2.unwrap_or(ramsey.t2);
            ramsey.nu = nu.unwrap_or(ramsey.nu);
            ramsey.t_overhead = t_overhead.unwrap_or(ramsey.t_overhead);
            ramsey.t_min = t_min.unwrap_or(ramsey.t_min);
            ramsey.t_max = t_max.unwrap_or(ramsey.t_max);
            ramsey.t_points = t_points.unwrap_or(ramsey.t_points);
            ramsey.phase = phase.unwrap_or(ramsey.phase);
            let req = RamseyRequest { source: source.source()?, basis, readout_fidelity: rf, ramsey, out };
            let s = commands::cmd_ramsey(&req)?;
            println!("{}", serde_json::to_string(&s).map_err(|e| CliError::Internal(e.into()))?);
            Ok(())
        }
        Command::Controllability { n, model, strategy, max_rounds, out } => {
            let r = commands::cmd_controllability(n, model, strategy, max_rounds, out.as_deref())?;
            println!("{}", serde_json::to_string(&r).map_err(|e| CliError::Internal(e.into()))?);
            Ok(())
        }
        Command::Oracle { omega, gamma, t_max, t_points, out } => {
            let rows = commands::cmd_oracle(omega, gamma, t_max, t_points)?;
            match out {
                Some(path) => record::write_csv(&path, &rows).map_err(CliError::Internal),
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for r in &rows {
                        w.serialize(r).map_err(|e| CliError::Internal(e.into()))?;
                    }
                    w.flush().map_err(|e| io_err(e, "writing stdout"))
                }
            }
        }
    }
}
