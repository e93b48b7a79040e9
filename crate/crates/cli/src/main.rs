use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpdos::io::{Command, MAX_SEED};
use lpdos::run::{load_config, run, RunOptions};

/// Scattering, LPDOS and Argand-loop analysis of 1D quantum networks.
#[derive(Parser)]
#[command(name = "lpdos", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// S-matrix at the configured energies.
    Smatrix(Common),
    /// S-matrix over an energy grid with unwrapped phases.
    ScanEnergy(Common),
    /// Argand trajectory of one element with detected sub-loops.
    ArgandSweep(Common),
    /// LPDOS, injectivity and sum-rule residual over probe positions.
    LpdosMap(Common),
    /// Finite-difference comparison of |s|^2 and phase changes over k.
    Eq10Scan(Common),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(Common),
    /// Run the command named in the config file.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Seed for the randomized checks of `verify`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Smatrix(c) => (Some(Command::Smatrix), c),
        Cmd::ScanEnergy(c) => (Some(Command::ScanEnergy), c),
        Cmd::ArgandSweep(c) => (Some(Command::ArgandSweep), c),
        Cmd::LpdosMap(c) => (Some(Command::LpdosMap), c),
        Cmd::Eq10Scan(c) => (Some(Command::Eq10Scan), c),
        Cmd::Verify(c) => (Some(Command::Verify), c),
        Cmd::Run(c) => (None, c),
    };
    let opts = RunOptions {
        command,
        out_dir: common.out,
        workers: common.workers.map(|w| w as usize),
        seed: common.seed,
    };
    let result = load_config(&common.config).and_then(|cfg| run(&cfg, &opts));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("wrote {}", report.output.display());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: one or more checks failed", report.command.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
