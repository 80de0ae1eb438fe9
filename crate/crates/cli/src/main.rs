use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use falsibo::harness::{load_results, run_matrix_with, write_reports, ConfigError, ExperimentConfig, HarnessError};
use falsibo::stl::{parse, signed_robustness};
use falsibo::trace::Trace;

/// Overrides `master_seed` from the config when set.
const SEED_VAR: &str = "FALSIBO_SEED";

#[derive(Parser)]
#[command(
    name = "falsibo",
    version,
    about = "Falsify systems against STL requirements with Bayesian optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run (or resume) an experiment matrix and write its reports.
    Run {
        config: PathBuf,
        /// Overrides the config's parallelism limit.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Rebuild the reports of a results directory from its run records.
    Report { results_dir: PathBuf },
    /// Print the signed robustness of a trace against a requirement.
    Monitor {
        /// Requirement text, or a file containing it.
        spec: String,
        trace: PathBuf,
    },
    /// Check a config without running anything.
    Validate { config: PathBuf },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => c.into(),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Ok(text) = std::env::var(SEED_VAR) {
        cfg.master_seed = text
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("{SEED_VAR}=`{text}` is not an unsigned integer")))?;
    }
    Ok(cfg)
}

fn execute(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run { config, parallelism } => {
            let cfg = load_config(&config)?;
            let summary = run_matrix_with(&cfg, parallelism.unwrap_or(cfg.parallelism))?;
            write_reports(&cfg.output_dir, &summary.cells)?;
            eprintln!(
                "{} runs executed, {} already on disk; results in {}",
                summary.executed,
                summary.skipped,
                cfg.output_dir.display()
            );
            print!("{}", falsibo::harness::emit_table(&summary.cells).text);
        }
        Cmd::Report { results_dir } => {
            let cells = load_results(&results_dir)?;
            write_reports(&results_dir, &cells)?;
            print!("{}", falsibo::harness::emit_table(&cells).text);
        }
        Cmd::Monitor { spec, trace } => {
            let path = Path::new(&spec);
            let text = if path.is_file() {
                std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{spec}: {e}")))?
            } else {
                spec
            };
            let formula = parse(&text).map_err(|e| Failure::Config(e.to_string()))?;
            let trace = Trace::load(&trace).map_err(|e| Failure::Runtime(format!("{}: {e}", trace.display())))?;
            let rho = signed_robustness(&formula, &trace).map_err(|e| Failure::Runtime(e.to_string()))?;
            println!("{rho:?}");
        }
        Cmd::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "ok: {} benchmarks, {} optimizers, {} repetitions",
                cfg.benchmarks.len(),
                cfg.optimizers.len(),
                cfg.repetitions
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
