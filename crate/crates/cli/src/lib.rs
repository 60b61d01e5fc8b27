//! Configuration, batch orchestration, analysis and the acceptance suite for the
//! `interchange` command.

pub mod analyze;
pub mod batch;
pub mod config;
pub mod suite;

use std::fmt;

pub use config::{ConfigError, ExperimentConfig, Mode};

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const CHECK_FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INVARIANT: u8 = 3;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Core(interchange_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(interchange_core::Error::Invariant { .. } | interchange_core::Error::Contract(_)) => {
                exit::INVARIANT
            }
            _ => exit::USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Config(e) => write!(f, "config: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<interchange_core::Error> for CliError {
    fn from(e: interchange_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}
