mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "halfline", version, about = "Half-line open multi-species TASEP toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo ensemble of one model; writes per-replica records and a
    /// frequency table.
    Simulate(Common),
    /// Exact long-time laws and stationary cylinder probabilities.
    Exact(Common),
    /// Runs a named verification suite and writes a JSON report.
    Verify(Common),
    /// Exact laws over a Cartesian grid of rates and parameters.
    Sweep(Common),
    /// Color-position symmetry of the Hecke walk: TV distance per case.
    HeckeCheck(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory; overrides `HALFLINE_OUT_DIR` and `run.out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed run together with its exit code.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn config(e: impl fmt::Display) -> Self {
        Failure::Config(e.to_string())
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }

    /// Parameter problems found while computing count as config errors.
    pub fn from_core(e: halfline_tasep::Error) -> Self {
        use halfline_tasep::Error as E;
        match e {
            E::InvalidRate(_)
            | E::InvalidTime(_)
            | E::InvalidParameter(_)
            | E::OutOfRange { .. }
            | E::EnumerationCap { .. }
            | E::RankTooLarge(_)
            | E::Parse(_) => Failure::config(e),
            _ => Failure::runtime(e),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(c) => commands::simulate(&c),
        Command::Exact(c) => commands::exact(&c),
        Command::Verify(c) => commands::verify(&c),
        Command::Sweep(c) => commands::sweep(&c),
        Command::HeckeCheck(c) => commands::hecke_check(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("halfline: {e}");
            ExitCode::from(e.code())
        }
    }
}
