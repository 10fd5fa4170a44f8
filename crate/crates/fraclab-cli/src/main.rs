//! `fraclab` — batch verification runner for the fractional diffusion
//! laboratory. Every experiment reads a flat `key = value` config, writes
//! full-precision CSVs plus a JSON verdict report, and exits 0 only if all
//! asserted invariants pass.

mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use fraclab::FracError;

#[derive(Debug, Parser)]
#[command(
    name = "fraclab",
    about = "Numerical laboratory for fractional diffusion with time-weighted absorption",
    version
)]
struct Cli {
    /// Path to a config file (key = value text with nested sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker thread count (default: FRACLAB_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Config override as a dotted path, e.g. --override params.p=1.4
    /// (repeatable).
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the fractional heat kernel and certify its two-sided bound.
    Kernel,
    /// Cross-validate the spectral and singular-integral operators.
    Operator,
    /// Run the splitting solver on a configured datum and dump snapshots.
    Evolve,
    /// Classify the large-weight Dirac limit (absorption vs diffusion).
    Dichotomy,
    /// Classify initial-trace balls of a Dirac run.
    Trace,
    /// Certify the self-similar barrier amplitude.
    Barrier,
    /// Drive growing capped data toward the flat maximal solution.
    Blowup,
    /// Evaluate the measure-admissibility integral.
    Admissibility,
    /// Compute the forward-in-time Harnack diagnostic.
    Harnack,
    /// Run the full acceptance suite.
    Selftest,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Kernel => Experiment::Kernel,
            Command::Operator => Experiment::Operator,
            Command::Evolve => Experiment::Evolve,
            Command::Dichotomy => Experiment::Dichotomy,
            Command::Trace => Experiment::Trace,
            Command::Barrier => Experiment::Barrier,
            Command::Blowup => Experiment::Blowup,
            Command::Admissibility => Experiment::Admissibility,
            Command::Harnack => Experiment::Harnack,
            Command::Selftest => Experiment::Selftest,
        }
    }
}

/// Exit codes: 0 pass, 1 invariant failure, 2 usage/config error,
/// 3 numerical failure.
fn error_exit_code(e: &FracError) -> u8 {
    match e {
        FracError::ConfigError(_) | FracError::HypothesisViolated(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli
        .threads
        .or_else(|| std::env::var("FRACLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }

    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let mut config = match ExperimentConfig::from_text(&text, &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    config.experiment = Some(cli.command.experiment());
    if let Some(dir) = &cli.output {
        config.output_dir = dir.display().to_string();
    }

    match experiments::run(&config) {
        Ok(report) => {
            print!("{}", report.summary());
            println!("report written to {}", config.output_dir);
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            // machine-readable failure list alongside the human message
            eprintln!("error: {e}");
            let failure = serde_json::json!({
                "experiment": cli.command.experiment().name(),
                "error": e.to_string(),
                "exit_code": error_exit_code(&e),
            });
            eprintln!("{failure}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}
