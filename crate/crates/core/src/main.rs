use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ncdisint::commands::{run, tolerance_for, Command, EXIT_INPUT};

/// Disintegrations of states on finite-dimensional C*-algebras.
#[derive(Parser)]
#[command(name = "ncdisint", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Equality threshold; the PSD and rank thresholds are scaled by the same factor.
    #[arg(long, global = true, env = "NCDISINT_TOLERANCE")]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report complete positivity, unitality and the homomorphism property of a map.
    CheckMap { file: PathBuf },
    /// Compare two maps almost everywhere with respect to a state.
    AeEqual { file: PathBuf },
    /// Decide whether a disintegration exists and construct it.
    Disintegrate { file: PathBuf },
    /// Classical disintegration of a function between finite probability spaces.
    Classical { file: PathBuf },
    /// Outcome distribution, Lüders projection and retrodiction for an observable.
    Measure { file: PathBuf },
    /// Compose two maps (or two stochastic matrices).
    Compose { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, file) = match cli.command {
        Cmd::CheckMap { file } => (Command::CheckMap, file),
        Cmd::AeEqual { file } => (Command::AeEqual, file),
        Cmd::Disintegrate { file } => (Command::Disintegrate, file),
        Cmd::Classical { file } => (Command::Classical, file),
        Cmd::Measure { file } => (Command::Measure, file),
        Cmd::Compose { file } => (Command::Compose, file),
    };
    let tol = match tolerance_for(cli.tolerance) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let input = match std::fs::read(&file) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let out = run(command, &input, &tol);
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
