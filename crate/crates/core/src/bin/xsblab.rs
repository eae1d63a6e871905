use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use xsblab::harness::{execute, exit_code_for, Command, Invocation, MANIFEST};

#[derive(Parser)]
#[command(name = "xsblab", version, about = "Spectral NLS experiments on model domains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration and XSBLAB_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalue table and basis record.
    Spectrum(Common),
    /// Split-step evolution with mass and energy diagnostics.
    Evolve(Common),
    /// Picard iteration of the Duhamel map with contraction report.
    Picard(Common),
    /// Estimate checks selected by `verify.kind`.
    Verify(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Evolve(c) => (Command::Evolve, c),
        Cmd::Picard(c) => (Command::Picard, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    let inv = Invocation { command, config: c.config, out: c.out, seed: c.seed, threads: c.threads };
    match execute(&inv) {
        Ok(outcome) => {
            println!("{} [{:?}] {}", command.name(), outcome.status, outcome.out_dir.join(MANIFEST).display());
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("xsblab: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
