//! Command-line front end for the `anontx` simulator.
//!
//! Every command returns its full output as a string together with an exit
//! status, which keeps the binary thin and the commands testable in-process.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod parse;
pub mod table;

/// Usage problems exit with 2, everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<anontx::Error> for CliError {
    fn from(e: anontx::Error) -> Self {
        use anontx::Error as E;
        match e {
            E::InvalidArgument(_) | E::Parse(_) | E::CapExceeded { .. } | E::ProtocolImpossible(_) => {
                CliError::Usage(e.to_string())
            }
            E::UnknownQubit(_) | E::ZeroProbability(_) | E::NoRoot(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    /// 0 on success, 1 when a check the command performs did not hold.
    pub status: i32,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Self { text, status: 0 }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "anontx",
    version,
    about = "Anonymous quantum transmission over noisy networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit JSON instead of CSV for tabular commands.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity and success probability over a (N, q) grid.
    Sweep(SweepArgs),
    /// Noise thresholds at which the fidelity drops to one half.
    Threshold(ThresholdArgs),
    /// Relay fidelities for every sender/receiver placement.
    Relay(RelayArgs),
    /// Security audit of the W protocol against a passive coalition.
    Security(NetworkArgs),
    /// Runs one protocol, or many seeded sampled runs.
    Run(RunArgs),
    /// Closed forms and structured evaluators against dense simulation.
    OracleCheck(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepProtocol {
    W,
    Ghz,
    Relay,
    #[value(name = "w_loss")]
    WLoss,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Analytic,
    Exact,
    Both,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub protocol: SweepProtocol,
    /// Noise family: dephasing, depolarizing or identity.
    #[arg(long, default_value = "depolarizing")]
    pub channel: String,
    /// Comma-separated q values.
    #[arg(long)]
    pub q: Option<String>,
    /// q grid as start:stop:step (default 0:1:0.01).
    #[arg(long)]
    pub q_range: Option<String>,
    /// Comma-separated network sizes (default 4,10,50).
    #[arg(long)]
    pub nodes: Option<String>,
    /// Network sizes as start:stop[:step].
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: SweepMode,
    /// Relay sender position (default 1).
    #[arg(long)]
    pub sender: Option<u32>,
    /// Relay receiver position (default N).
    #[arg(long)]
    pub receiver: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Comma-separated network sizes.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Network sizes as start:stop[:step] (default 3:200).
    #[arg(long)]
    pub n_range: Option<String>,
    /// Noise family: depolarizing or dephasing.
    #[arg(long, default_value = "depolarizing")]
    pub channel: String,
}

#[derive(Debug, Args)]
pub struct RelayArgs {
    /// Chain length.
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    /// Comma-separated q values.
    #[arg(long, default_value = "0.8,0.95")]
    pub q: String,
    /// Noise family: depolarizing or dephasing.
    #[arg(long, default_value = "depolarizing")]
    pub channel: String,
}

/// Network description shared by `run` and `security`; flags override the
/// config file.
#[derive(Debug, Args, Default)]
pub struct NetworkArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub sender: Option<u32>,
    #[arg(long)]
    pub receiver: Option<u32>,
    /// Channel spec, e.g. depolarizing:q=0.8.
    #[arg(long)]
    pub channel: Option<String>,
    /// Per-node channel, e.g. node3=depolarizing:q=0.75 (repeatable).
    #[arg(long = "override")]
    pub overrides: Vec<String>,
    /// Comma-separated lost nodes.
    #[arg(long)]
    pub lost: Option<String>,
    /// Comma-separated adversarial nodes.
    #[arg(long)]
    pub adversaries: Option<String>,
    /// Message state: zero, one, plus, minus or bloch:theta,phi.
    #[arg(long)]
    pub message: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// w, ghz or relay.
    #[arg(long)]
    pub protocol: Option<String>,
    /// exact or sampled.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeded sampled runs.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write the transcript of a single run as JSON lines.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Network sizes as start:stop[:step] (at least 4).
    #[arg(long, default_value = "4:8")]
    pub n_range: String,
    /// q grid as start:stop:step.
    #[arg(long, default_value = "0:1:0.1")]
    pub q_range: String,
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Sweep(a) => commands::sweep(a, cli.json),
        Command::Threshold(a) => commands::threshold(a, cli.json),
        Command::Relay(a) => commands::relay(a, cli.json),
        Command::Security(a) => commands::security(a),
        Command::Run(a) => commands::run(a),
        Command::OracleCheck(a) => commands::oracle_check(a, cli.json),
    }
}
