//! Command-line front end for `relaxed-admm`: parameter tuning, rate
//! certification on the attainability instance, and sweep experiments that
//! emit plot-ready CSV or JSON.
//!
//! Every subcommand resolves its settings from three layers, highest first:
//! command-line flags, a flat TOML file given by `--config`, built-in
//! defaults. The resolved settings structs and the functions that run them
//! are public so the commands can be driven without spawning a process.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod grid;
pub mod output;

use commands::{CertifyArgs, ClassifyArgs, RateSweepArgs, TuneArgs};
use config::ConfigLayer;
use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// The computation ran but could not produce a trustworthy answer.
    #[error("{0}")]
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Inconclusive(_) => 2,
        }
    }
}

impl From<relaxed_admm::Error> for CliError {
    fn from(e: relaxed_admm::Error) -> Self {
        use relaxed_admm::Error as E;
        match e {
            E::Domain { .. } | E::Dimension(_) | E::Dataset(_) => CliError::Usage(e.to_string()),
            E::Solver { .. } | E::Estimation(_) => CliError::Inconclusive(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "relaxed-admm", version, about = "Tuning, certification and sweeps for over-relaxed ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Penalty and relaxation parameters for given conditioning.
    Tune(TuneArgs),
    /// Theoretical (and optionally simulated) rates over an (alpha, rho0, kappa) grid.
    RateSweep(RateSweepArgs),
    /// Fitted rates of sparse logistic regression for a list of alphas.
    ClassifySweep(ClassifyArgs),
    /// Check that the attainability instance converges at the predicted rate.
    Certify(CertifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat TOML file of flag values; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Output settings shared by all commands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Common {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub format: Format,
}

impl Common {
    pub fn resolve(args: &CommonArgs, cfg: &mut ConfigLayer) -> Result<Self, CliError> {
        let format = match cfg.string("format", None)? {
            None => Format::default(),
            Some(s) => Format::from_str(&s, true).map_err(|e| CliError::Usage(format!("config key format: {e}")))?,
        };
        let file_out = cfg.string("out", None)?.map(PathBuf::from);
        Ok(Self {
            out: args.out.clone().or(file_out),
            seed: cfg.u64("seed", args.seed)?.unwrap_or(0),
            format: args.format.unwrap_or(format),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success | Status::Pass => 0,
            Status::Fail | Status::Inconclusive => 2,
        }
    }
}

/// What a command produced: a table for machines, a report for people.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub report: String,
    pub status: Status,
}

/// Runs one parsed command line, writing the table to `--out` (or stdout)
/// and the report to stderr. Returns the process exit code.
pub fn execute(cli: Cli) -> Result<u8, CliError> {
    let common_args = match &cli.command {
        Command::Tune(a) => &a.common,
        Command::RateSweep(a) => &a.common,
        Command::ClassifySweep(a) => &a.common,
        Command::Certify(a) => &a.common,
    };
    let mut cfg = match &common_args.config {
        Some(path) => ConfigLayer::load(path)?,
        None => ConfigLayer::default(),
    };
    let (common, outcome) = match &cli.command {
        Command::Tune(a) => commands::tune_from_args(a, &mut cfg)?,
        Command::RateSweep(a) => commands::rate_sweep_from_args(a, &mut cfg)?,
        Command::ClassifySweep(a) => commands::classify_from_args(a, &mut cfg)?,
        Command::Certify(a) => commands::certify_from_args(a, &mut cfg)?,
    };
    emit(&common, &outcome.table)?;
    if !outcome.report.is_empty() {
        eprint!("{}", outcome.report);
    }
    Ok(outcome.status.exit_code())
}

/// Writes `table` in the chosen format to the chosen destination.
pub fn emit(common: &Common, table: &Table) -> Result<(), CliError> {
    let io = |e: io::Error| CliError::Io(e.to_string());
    let mut sink: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    match common.format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &table.to_json()).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(sink).map_err(io)?;
        }
    }
    sink.flush().map_err(io)
}
