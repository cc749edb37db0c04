use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gurtin::acceptance;
use gurtin_lab::{plots, run, RunError};

/// Stability experiments for thermoelastic Bresse and Timoshenko beams.
#[derive(Parser)]
#[command(name = "gurtin-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run { config: PathBuf },
    /// Write gnuplot scripts for the CSV files in a directory.
    Plots { dir: PathBuf },
    /// Run the acceptance checks.
    Selftest {
        /// Only this criterion (1 to 9).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=9))]
        only: Option<u8>,
    },
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run(&config) {
            Ok(summary) => {
                for f in &summary.files {
                    println!("{}", summary.output_dir.join(f).display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Plots { dir } => match plots::emit_plots(&dir) {
            Ok(report) => {
                for w in &report.warnings {
                    eprintln!("warning: {w}");
                }
                for p in &report.written {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Selftest { only } => {
            let outcomes = match only {
                Some(id) => vec![acceptance::run_criterion(id)],
                None => acceptance::run_all(),
            };
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
