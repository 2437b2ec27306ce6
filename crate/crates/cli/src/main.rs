mod args;
mod commands;
mod settings;
mod suites;

use std::process::ExitCode;

use clap::Parser;
use ratchetlab_core::Error;

use args::{Cli, Command};
use settings::Settings;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters (exit 2).
    Usage(String),
    /// Runtime failure (exit 1).
    Runtime(String),
    /// Verification ran but at least one verdict failed (exit 1).
    Failed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Domain { .. } | Error::Pole { .. } | Error::IntegerB { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    if let Some(w) = cli.workers {
        settings.workers = w.max(1);
    }
    match cli.command {
        Command::Speed(a) => commands::speed(&a, &settings),
        Command::Table(a) => commands::table(&a, &settings),
        Command::Simulate(a) => commands::simulate(&a, &settings),
        Command::Verify(a) => commands::verify(&a, &settings),
        Command::Couple(a) => commands::couple(&a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failed) => ExitCode::from(1),
    }
}
