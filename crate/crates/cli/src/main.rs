//! `nskc`: runs experiments from config files and summarises their results.
//!
//! Exit codes: 0 on success (including runs stopped by a monitor and runs
//! whose checks fail), 2 for an invalid config, 1 for any other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nskc::harness::{
    collect_reports, run_experiment, ConfigError, ExperimentConfig, ExperimentKind, HarnessError,
};

#[derive(Parser)]
#[command(
    name = "nskc",
    version,
    about = "Rotating compressible Navier-Stokes-Korteweg experiments"
)]
struct Cli {
    /// More log output; repeat for debug and trace.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Root directory for run directories.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// Modal decay rates, Lyapunov bounds and energy conservation.
    #[command(alias = "linear-decay")]
    LinearDecay(RunArgs),
    /// Per-block smoothing exponents in the low and high bands.
    #[command(alias = "energy-exponents")]
    EnergyExponents(RunArgs),
    /// Dispersive decay of the rotating acoustic flow against |Omega|.
    Strichartz(RunArgs),
    /// Empirical constants of the product and composition bounds.
    #[command(alias = "lemma-constants")]
    LemmaConstants(RunArgs),
    /// Local fixed-point construction and its agreement with time stepping.
    Picard(RunArgs),
    /// Long-time outcome over a grid of (Omega, eps).
    #[command(alias = "phase-diagram")]
    PhaseDiagram(RunArgs),
    /// One long run with tracker output and snapshots.
    #[command(alias = "single-run")]
    SingleRun(RunArgs),
    /// Checks a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Prints the summaries of a run directory or of all runs below it.
    Report {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn load(
    path: &Path,
    seed: Option<u64>,
    expected: Option<ExperimentKind>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(kind) = expected.filter(|k| *k != cfg.kind) {
        return Err(ConfigError::Field {
            field: "kind".into(),
            message: format!(
                "config is for `{}` but the subcommand is `{kind}`",
                cfg.kind
            ),
        });
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set_workers(workers: Option<usize>) -> Result<()> {
    let Some(n) = workers else { return Ok(()) };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the worker pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        log::warn!("built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), HarnessError> {
    let cfg = load(&args.config, args.seed, Some(kind))?;
    set_workers(args.workers)
        .map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))?;
    let report = run_experiment(&cfg, &args.out)?;
    println!(
        "{} {} -> {}",
        cfg.kind,
        report.summary.status,
        report.dir.display()
    );
    for line in report.summary.lines() {
        println!("  {line}");
    }
    for note in &report.summary.notes {
        println!("  note: {note}");
    }
    Ok(())
}

fn report(out: &Path) -> Result<()> {
    let reports = collect_reports(out)
        .with_context(|| format!("cannot read results under {}", out.display()))?;
    if reports.is_empty() {
        println!("no runs under {}", out.display());
    }
    for (dir, s) in reports {
        println!(
            "{} [{}] {} seed {} ({:.1} s)",
            dir.display(),
            s.kind,
            s.status,
            s.seed,
            s.wall_time_s
        );
        for line in s.lines() {
            println!("  {line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match &cli.command {
        Command::LinearDecay(a) => run(ExperimentKind::LinearDecay, a),
        Command::EnergyExponents(a) => run(ExperimentKind::EnergyExponents, a),
        Command::Strichartz(a) => run(ExperimentKind::Strichartz, a),
        Command::LemmaConstants(a) => run(ExperimentKind::LemmaConstants, a),
        Command::Picard(a) => run(ExperimentKind::Picard, a),
        Command::PhaseDiagram(a) => run(ExperimentKind::PhaseDiagram, a),
        Command::SingleRun(a) => run(ExperimentKind::SingleRun, a),
        Command::Validate { config, seed } => load(config, *seed, None)
            .map(|cfg| {
                println!("config ok: {} {}", cfg.kind, cfg.hash());
            })
            .map_err(HarnessError::from),
        Command::Report { out } => {
            return match report(out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
