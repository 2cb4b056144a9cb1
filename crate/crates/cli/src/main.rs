//! `pltf`: batch runner for PLTF fits, model-order sweeps and link-prediction
//! grids.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (bad inputs or
//! I/O), 3 numerical error (singular model, non-finite state).

mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Select(a) => commands::select(a),
        Command::EvalLinks(a) => commands::eval_links(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
