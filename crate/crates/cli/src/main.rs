//! `coupled-osc`: runs coupled-oscillator experiments described by JSON configs.

mod config;
mod output;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::run::{run_text, RunError, RunOptions};
use crate::validate::{validate_text, Level};

#[derive(Parser)]
#[command(name = "coupled-osc", version, about = "Coupled quantum oscillator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory (overrides the config and COUPLED_OSC_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration / quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the scenario and write its traces.
    Run(RunArgs),
    /// Check a config and print diagnostics.
    Validate { config: PathBuf },
    /// Run the scenario against the numerical oracle and write a deviation report.
    Compare(RunArgs),
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))
}

fn execute(args: RunArgs, compare: bool) -> Result<(), RunError> {
    let text = read(&args.config)?;
    let outcome = run_text(&text, &RunOptions { out: args.out.as_deref(), tol: args.tol, compare })?;
    for w in &outcome.warnings {
        eprintln!("{w}");
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => execute(a, false),
        Command::Compare(a) => execute(a, true),
        Command::Validate { config } => match read(&config) {
            Ok(text) => {
                let diags = validate_text(&text);
                for d in &diags {
                    println!("{d}");
                }
                if diags.iter().any(|d| d.level == Level::Error) {
                    return ExitCode::from(2);
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coupled-osc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
