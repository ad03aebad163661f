mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Status};
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "landau", version, about = "Spectra and topological invariants of Landau-type Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fock truncation level
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Estimator / check tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// landau, jc or quaternionic
    #[arg(long, global = true)]
    model: Option<String>,
    /// Run only this check (repeatable)
    #[arg(long, global = true)]
    check: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalue table and spectral gaps
    Spectrum,
    /// Rank and Chern number reports
    Invariants,
    /// Identity checks with a pass/fail table
    Verify,
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let over = Overrides {
        out: cli.out.clone(),
        nmax: cli.nmax,
        tol: cli.tol,
        model: cli.model.clone(),
        checks: cli.check.clone(),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), |k| std::env::var(k).ok(), &over)?;
    let (status, files) = match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg)?,
        Command::Invariants => commands::cmd_invariants(&cfg)?,
        Command::Verify => commands::cmd_verify(&cfg)?,
    };
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match run(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    };
    ExitCode::from(status as u8)
}
