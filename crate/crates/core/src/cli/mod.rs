//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 parameters, 4 input data, 5 network,
//! 6 enumeration budget, 1 anything else.

mod commands;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::fixedpoint::FixedPointError;
use crate::leakage::LeakageError;
use crate::mpc::MpcError;
use crate::net::NetError;
use crate::params::ParamError;
use crate::protocol::{ProtocolError, Variant};
use crate::stats::StatsError;

pub use report::Report;

#[derive(Debug, Parser)]
#[command(name = "semicorr", version, about = "Two-party secure Pearson correlation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate parameters and report the minimal spacing and error bound
    Plan(PlanArgs),
    /// Run both parties in-process and compare with the plaintext correlation
    Simulate(SimulateArgs),
    /// Run one party over TCP
    Run(RunArgs),
    /// Write Beaver triple files for both parties
    Deal(DealArgs),
    /// Analyse what the exact variant's leakage reveals about the peer
    Leakage(LeakageArgs),
    /// Minimal spacing and worst-case error for the 32-bit reference prime
    Table1(Table1Args),
    /// Generate a correlated Gaussian sample pair
    GenData(GenDataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Exact,
    Approx,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Exact => Variant::Exact,
            VariantArg::Approx => Variant::Approximate,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Bound R on the absolute grid-rounded z-scores
    #[arg(short = 'R', long = "bound", default_value_t = 2.5)]
    pub bound: f64,
    /// Grid spacing delta, as a decimal or p/q
    #[arg(long, default_value = "0.1")]
    pub delta: String,
    /// Prime modulus, or "auto" for the smallest admissible one
    #[arg(long, default_value = "auto")]
    pub prime: String,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(short = 'R', long = "bound")]
    pub bound: f64,
    /// Grid spacing; omitted means report the minimal spacing for the prime
    #[arg(long)]
    pub delta: Option<String>,
    /// Prime modulus or "auto"; defaults to 4294967291 when no delta is given
    #[arg(long)]
    pub prime: Option<String>,
    /// Also write the report as key,value CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub input1: PathBuf,
    pub input2: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Exact)]
    pub variant: VariantArg,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the modulus bound, allowing tiny primes (testing only)
    #[arg(long)]
    pub test_mode: bool,
    /// Also write the report as key,value CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write party 1's leakage record as CSV (exact variant)
    #[arg(long)]
    pub leakage_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub role: u8,
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Exact)]
    pub variant: VariantArg,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Address to listen on (party 1)
    #[arg(long, env = crate::net::BIND_ENV, conflicts_with = "connect")]
    pub listen: Option<String>,
    /// Address of party 1 (party 2)
    #[arg(long)]
    pub connect: Option<String>,
    /// Triple file for this party; without it, triples are dealt from --seed
    #[arg(long)]
    pub triples: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    /// Write every frame as "sent|recv <hex>" lines
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DealArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out1: PathBuf,
    #[arg(long)]
    pub out2: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    /// Enumerate all grid solutions of the two leaked equations
    Enumerate,
    /// Recover a two-point support from the error classes
    TwoPoint,
}

#[derive(Debug, Args)]
pub struct LeakageArgs {
    pub input1: PathBuf,
    pub input2: PathBuf,
    /// The curious party
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub view: u8,
    #[arg(long, value_enum, default_value_t = AttackArg::Enumerate)]
    pub attack: AttackArg,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::leakage::DEFAULT_BUDGET)]
    pub budget: f64,
    /// Allow enumerations beyond the budget
    #[arg(long)]
    pub long_running: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    /// Directory for frequencies.csv (and frequencies.pgm with --pgm)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub pgm: bool,
    /// Pixels per table cell in the PGM
    #[arg(long, default_value_t = 8)]
    pub cell: usize,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(short = 'n', long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out1: PathBuf,
    #[arg(long)]
    pub out2: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Param(_) => 3,
            CliError::Data(_) => 4,
            CliError::Network(_) => 5,
            CliError::Budget(_) => 6,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<FixedPointError> for CliError {
    fn from(e: FixedPointError) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MpcError> for CliError {
    fn from(e: MpcError) -> Self {
        match e {
            MpcError::TripleFile(_) | MpcError::Io(_) => CliError::Data(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Params(p) => p.into(),
            ProtocolError::FixedPoint(p) => p.into(),
            ProtocolError::Stats(s) => s.into(),
            ProtocolError::Mpc(m) => m.into(),
            ProtocolError::RangeAbort { .. } | ProtocolError::LengthMismatch { .. } => CliError::Data(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Protocol(p) => p.into(),
            other => CliError::Network(other.to_string()),
        }
    }
}

impl From<LeakageError> for CliError {
    fn from(e: LeakageError) -> Self {
        match e {
            LeakageError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            LeakageError::Protocol(p) => p.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

/// Executes a parsed command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match cli.command {
        Command::Plan(a) => commands::plan(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Run(a) => commands::run(a, out),
        Command::Deal(a) => commands::deal(a, out),
        Command::Leakage(a) => commands::leakage(a, out),
        Command::Table1(a) => commands::table1(a, out),
        Command::GenData(a) => commands::gen_data(a, out),
    }
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
