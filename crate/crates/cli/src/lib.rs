//! Command-line front end: configuration files, subcommands and output files.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

use config::ConfigError;

/// Exit code for success.
pub const EXIT_OK: u8 = 0;
/// Exit code for bad input: configuration, parameters, I/O.
pub const EXIT_INPUT: u8 = 2;
/// Exit code for numerical failure; output files are still written.
pub const EXIT_NUMERICS: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] multipolar::error::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use multipolar::error::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::Quadrature { .. } | E::ZeroField | E::Linalg(_) => EXIT_NUMERICS,
                E::InvalidParameter(_)
                | E::IndexOutOfRange(_)
                | E::Singular { .. }
                | E::Indefinite(_)
                | E::Unsorted(_) => EXIT_INPUT,
            },
        }
    }
}
