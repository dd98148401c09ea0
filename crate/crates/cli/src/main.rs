//! `lsmap`: grids of the Lamperti-stable MAP exponent and its ladder
//! factors, the identity verification suite and Monte Carlo runs.
//!
//! Exit codes: 0 success, 1 a check or statistical bound failed, 2 usage
//! or domain error, 3 numerical non-convergence.

mod commands;
mod config;
mod grid;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lsmap_core::Error;

use config::{Common, ExponentArgs, FactorsArgs, FileConfig, SimulateArgs, VerifyArgs};

#[derive(Parser)]
#[command(name = "lsmap", version, about = "Lamperti-stable MAP factorisation, exit laws and Monte Carlo checks")]
struct Cli {
    /// TOML file with defaults; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate F, F_circ or F_hat over a grid of complex z (CSV).
    Exponent {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: ExponentArgs,
    },
    /// Tabulate the ladder factors and their components over real λ (CSV).
    Factors {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: FactorsArgs,
    },
    /// Run every applicable identity check (JSON); exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: VerifyArgs,
    },
    /// Monte Carlo estimator against its closed form (CSV histogram, JSON summary).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        args: SimulateArgs,
    },
    /// Hypergeometric identities, for one (α, ρ) or on default grids (JSON).
    Identities {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(Error::Budget(_)) => 3,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
        }
    }
}

fn write_to(path: Option<&Path>, text: &str, fallback_stderr: bool) -> Result<(), Failure> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None if fallback_stderr => std::io::stderr()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    res.map_err(Failure::Io)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let (cfg, outcome) = match cli.command {
        Command::Exponent { common, args } => {
            let cfg = config::exponent(common, args, file)?;
            let o = commands::exponent(&cfg)?;
            (cfg, o)
        }
        Command::Factors { common, args } => {
            let cfg = config::factors(common, args, file)?;
            let o = commands::factors(&cfg)?;
            (cfg, o)
        }
        Command::Verify { common, args } => {
            let cfg = config::verify(common, args, file)?;
            let o = commands::verify(&cfg)?;
            (cfg, o)
        }
        Command::Simulate { common, args } => {
            let cfg = config::simulate(common, args, file)?;
            let o = commands::simulate(&cfg)?;
            (cfg, o)
        }
        Command::Identities { common } => {
            let cfg = config::identities(common, file)?;
            let o = commands::identities(&cfg)?;
            (cfg, o)
        }
    };
    write_to(cfg.output.as_deref().map(Path::new), &outcome.main, false)?;
    if let Some(side) = &outcome.side {
        let summary = match &cfg.command {
            config::CommandConfig::Simulate { summary, .. } => summary.as_deref().map(Path::new),
            _ => None,
        };
        write_to(summary, side, true)?;
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("lsmap: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
