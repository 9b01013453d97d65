//! Command-line front end for `duffamp-core`.

pub mod args;
pub mod commands;
pub mod config;

use std::process::ExitCode;

use clap::Parser;
use duffamp_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NO_SOLUTION: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    NoSolution(String),
    OracleFailure(usize),
    Io(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::NoSolution(_) => EXIT_NO_SOLUTION,
            CliError::OracleFailure(_) => EXIT_ORACLE,
            CliError::Io(_) | CliError::Other(_) => EXIT_FAILURE,
        }
    }

    /// Core errors raised while validating inputs are configuration errors.
    pub(crate) fn from_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::ThermalBath(_) | Error::InvalidGrid(_) => CliError::Config(e.to_string()),
            Error::EmptyDataset(_)
            | Error::CriticalPoint(_)
            | Error::UnstableFixedPoint { .. }
            | Error::NonRealSpectrum { .. } => CliError::NoSolution(e.to_string()),
            Error::Numerical(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::NoSolution(m) => write!(f, "no solution: {m}"),
            CliError::OracleFailure(n) => write!(f, "{n} oracle check(s) failed"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

/// Parses the process arguments and runs the selected command.
pub fn main_entry() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap already uses 0 for --help/--version and 2 for usage errors.
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("duffamp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
