//! Command line front end for the coordination toolkit.
//!
//! Four subcommands share one experiment config file: `check` decides
//! feasibility of a target behavior, `optimize` searches for the best
//! auxiliary scheme, `simulate` runs one coding-scheme experiment, and
//! `sweep` repeats it over a list of block lengths. Exit codes from
//! `check` carry the verdict: 0 achievable, 2 infeasible, 3 undecided.
//! Everything else exits 0 on success and 1 on any error.

mod canon;
mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::OutputFormat;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] coordex::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(name = "coordex", version, about = "coordination region tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the target behavior is achievable
    Check(RunArgs),
    /// Search for the best auxiliary scheme
    Optimize(RunArgs),
    /// Run the coding scheme and estimate its error probability
    Simulate(RunArgs),
    /// Simulate across a list of block lengths
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (json)
    #[arg(long)]
    config: PathBuf,
    /// Override every seed in the config
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output path in the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the report format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Override the trial count
    #[arg(long)]
    trials: Option<u64>,
    /// Suppress progress lines on stdout
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Block lengths to sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "8,16,24")]
    ns: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

/// Honor the COORDEX_THREADS cap before any parallel work starts.
fn init_threads() -> Result<(), CliError> {
    match std::env::var("COORDEX_THREADS") {
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                CliError::Config(format!("COORDEX_THREADS must be a positive integer, got {raw:?}"))
            })?;
            if n == 0 {
                return Err(CliError::Config(
                    "COORDEX_THREADS must be a positive integer, got 0".to_string(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Config(format!("COORDEX_THREADS: {e}"))),
    }
}

fn prepare(args: &RunArgs) -> Result<commands::Run, CliError> {
    let mut cfg = config::ExperimentConfig::load(&args.config)?;
    cfg.apply_overrides(
        args.seed,
        args.trials,
        args.out.clone(),
        args.format.map(OutputFormat::from),
    );
    cfg.validate()?;
    // hash the effective config so a rerun of the same manifest hash
    // reproduces the same report bytes
    let config_hash = canon::content_hash(&canon::canonical_string(&cfg)?);
    Ok(commands::Run {
        cfg,
        config_hash,
        quiet: args.quiet,
        started: manifest::timestamp(),
    })
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    init_threads()?;
    match &cli.command {
        Command::Check(args) => commands::cmd_check(&prepare(args)?),
        Command::Optimize(args) => commands::cmd_optimize(&prepare(args)?),
        Command::Simulate(args) => commands::cmd_simulate(&prepare(args)?),
        Command::Sweep(sweep) => commands::cmd_sweep(&prepare(&sweep.run)?, &sweep.ns),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too; only usage mistakes are
            // errors, and those must not collide with the verdict codes
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
