//! `akaprime`: provision subscribers, run and compare authentication
//! scenarios, re-check stored traces and replay federated AAA requests.
//!
//! Exit codes: 0 when the outcome matches the expectation, 1 when it does
//! not, 2 for configuration or I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "akaprime", version, about = "EAP-AKA' / 5G-AKA authentication simulator")]
struct Cli {
    /// Print every trace event.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Seed override; wins over any seed stored in the input files.
    #[arg(long, env = "AKAPRIME_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a file of deterministically generated subscribers.
    Provision {
        #[arg(long, short = 'n', default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "001")]
        mcc: String,
        #[arg(long, default_value = "01")]
        mnc: String,
        /// Conceal identities as SUCIs instead of sending the permanent NAI.
        #[arg(long)]
        conceal: bool,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run a scenario file, or every *.json scenario in a directory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Subscriber file to use instead of the one the scenario names.
        #[arg(long)]
        subscribers: Option<PathBuf>,
        /// JSON-lines trace output (a directory when running a directory).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Run EAP-AKA' and 5G-AKA for the same scenario and seed and compare them.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        subscribers: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Re-derive the verdict of a stored trace.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Scenario whose expected outcome the verdict is checked against.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Decide federated access requests against a realm policy table.
    Federate {
        #[arg(long)]
        policy: PathBuf,
        /// JSON array of access requests.
        #[arg(long)]
        requests: PathBuf,
        /// Subscribers known to the local 5G core.
        #[arg(long)]
        subscribers: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
}

/// Outcome of a command as seen by the shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Match,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let v = cli.verbose;
    let result = match cli.command {
        Command::Provision { count, out, mcc, mnc, conceal, seed } => {
            commands::provision(count, seed.seed.unwrap_or(0), &mcc, &mnc, conceal, &out)
        }
        Command::Run { scenario, subscribers, trace_out, seed } => {
            commands::run(&scenario, subscribers.as_deref(), trace_out.as_deref(), seed.seed, v)
        }
        Command::Compare { scenario, subscribers, seed } => {
            commands::compare(&scenario, subscribers.as_deref(), seed.seed)
        }
        Command::Replay { trace, scenario } => commands::replay(&trace, scenario.as_deref(), v),
        Command::Federate { policy, requests, subscribers, seed } => {
            commands::federate(&policy, &requests, subscribers.as_deref(), seed.seed.unwrap_or(0), v)
        }
    };
    match result {
        Ok(Status::Match) => ExitCode::SUCCESS,
        Ok(Status::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
