//! `qsn`: bounds, protocols and simulations for sensor-network function
//! estimation.
//!
//! Subcommands: `bound`, `compile`, `simulate`, `reshape-bench`, `compare`.
//! Every command is a pure function of (config, seed) to files on disk.
//!
//! Exit codes: 0 ok, 2 config error, 3 infeasible/degenerate mathematics,
//! 4 resource limit.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{ExperimentConfig, OutputFormat};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Math(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<qsn_core::l1::L1Error> for CliError {
    fn from(e: qsn_core::l1::L1Error) -> Self {
        use qsn_core::l1::L1Error::*;
        match e {
            SizeExceeded { .. } => CliError::Resource(e.to_string()),
            Infeasible | RankDeficient { .. } | Numerical => CliError::Math(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<qsn_core::protocol::ProtocolError> for CliError {
    fn from(e: qsn_core::protocol::ProtocolError) -> Self {
        CliError::Math(e.to_string())
    }
}

impl From<qsn_core::dynamics::DynamicsError> for CliError {
    fn from(e: qsn_core::dynamics::DynamicsError) -> Self {
        use qsn_core::dynamics::DynamicsError::*;
        match e {
            SizeExceeded { .. } => CliError::Resource(e.to_string()),
            TooFewTrials { .. } => CliError::Config(e.to_string()),
            Pauli(p) => CliError::Config(p.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<qsn_core::estimation::EstimationError> for CliError {
    fn from(e: qsn_core::estimation::EstimationError) -> Self {
        use qsn_core::estimation::EstimationError::*;
        match e {
            SignalOutOfRange { .. } | DegenerateL1 => CliError::Math(e.to_string()),
            Dynamics(d) => d.into(),
            Pauli(p) => CliError::Config(p.to_string()),
            MissingInteraction | TooFewRepetitions { .. } => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qsn",
    about = "Precision bounds, switching protocols and exact simulation for \
             estimating linear functions of sensor-network Hamiltonian parameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed override; required (here or in the config) for stochastic
    /// commands. Runs never seed from the clock.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's output.dir, then ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output encoding for tabular results.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the precision-bound program and emit the optimal vector,
    /// norms, bound and dual certificate (JSON).
    Bound(CommonArgs),
    /// Compile the optimal vector into a switching schedule (JSON).
    Compile(CommonArgs),
    /// Monte Carlo estimation of q in ideal or reshaped mode (CSV).
    Simulate(CommonArgs),
    /// Benchmark the randomized-Trotterization error against its bounds
    /// (CSV pair).
    ReshapeBench(CommonArgs),
    /// Closed-form baseline comparison Q1/Q2 (CSV).
    Compare(CommonArgs),
}

fn load(args: &CommonArgs) -> Result<(ExperimentConfig, PathBuf, OutputFormat), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("read {}: {e}", args.config.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let format = args
        .format
        .or_else(|| cfg.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Csv);
    Ok((cfg, out, format))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Bound(args) => {
            let (cfg, out, _) = load(&args)?;
            commands::cmd_bound(&cfg, &out)
        }
        Command::Compile(args) => {
            let (cfg, out, _) = load(&args)?;
            commands::cmd_compile(&cfg, &out)
        }
        Command::Simulate(args) => {
            let (cfg, out, format) = load(&args)?;
            let seed = cfg.resolve_seed(args.seed)?;
            commands::cmd_simulate(&cfg, seed, &out, format)
        }
        Command::ReshapeBench(args) => {
            let (cfg, out, format) = load(&args)?;
            let seed = cfg.resolve_seed(args.seed)?;
            commands::cmd_reshape_bench(&cfg, seed, &out, format)
        }
        Command::Compare(args) => {
            let (cfg, out, format) = load(&args)?;
            commands::cmd_compare(&cfg, &out, format)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
