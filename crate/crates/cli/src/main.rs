//! `tapelab`: simulate consolidated tapes and measure what the SIPs report.
//!
//! Standard output carries only the JSON summary of each command; logs go
//! to standard error. Exit codes are listed in [`exit`].

mod analyze;
mod exit;
mod figures;
mod files;
mod report;
mod simulate;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "tapelab", version, about = "Consolidated-tape simulator and SIP accuracy analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate exchange events and the three SIP tapes for a scenario.
    Simulate(simulate::SimulateArgs),
    /// Run one analysis over tapes.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
    /// Run the full analysis battery over a simulated run directory.
    Report(report::ReportArgs),
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("TAPELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| exit::usage(format!("TAPELAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    log::debug!("worker threads: {n}");
    Ok(())
}

fn execute(cli: &Cli) -> Result<Value> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(args) => Ok(serde_json::to_value(simulate::run(args)?)?),
        Command::Analyze(cmd) => analyze::run(cmd),
        Command::Report(args) => report::run(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", serde_json::to_string_pretty(&summary).unwrap_or_default()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(_) => ExitCode::from(exit::IO),
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err))
        }
    }
}
