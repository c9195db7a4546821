use std::path::PathBuf;

use thiserror::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no resonant drive: {0}")]
    NoResonantDrive(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::NoResonantDrive(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<rotrap_core::Error> for CliError {
    fn from(e: rotrap_core::Error) -> Self {
        match e {
            rotrap_core::Error::NoResonantDrive => CliError::NoResonantDrive(e.to_string()),
            rotrap_core::Error::NotSymmetric { .. }
            | rotrap_core::Error::NotPositiveDefinite { .. }
            | rotrap_core::Error::InvalidAxis
            | rotrap_core::Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
