//! `ara-engine`: command-line front end for the adversarial risk analysis
//! engine. Implements the three-step pipeline (model validation, attack
//! simulation, defense adoption) plus direct access to every solver and
//! the auction analyses.
//!
//! Exit codes: 0 success, 2 input validation failure, 3 solver failure.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
