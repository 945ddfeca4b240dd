//! Sweep and verification front end for the `repqed` engines.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweeps;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] repqed::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Engine(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}
