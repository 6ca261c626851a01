//! Scenario files, sample files, CSV output and the commands behind the
//! `conformable` binary.

pub mod commands;
pub mod config;
pub mod output;
mod random;
pub mod samples;
pub mod verify;

use thiserror::Error;

pub use commands::{run, Command, Outcome, RunOptions};
pub use config::{ScenarioConfig, DEFAULT_CONFIG};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] conformable::Error),

    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl CliError {
    /// 2 for bad input, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Write { .. } => 2,
            CliError::Core(e) if e.is_configuration() => 2,
            CliError::Core(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
