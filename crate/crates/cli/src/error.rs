use std::process::ExitCode;

use swarmpat::acoustics::AcousticsError;
use swarmpat::sim::SimError;
use thiserror::Error;

/// Failure of one command. Each variant owns one stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// The run completed but its verdict is negative.
    #[error("{0}")]
    Verdict(String),
    /// Unreadable or malformed input.
    #[error("{0}")]
    Config(String),
    /// Well-formed input the model rejects.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Verdict(_) => 1,
            Self::Config(_) => 2,
            Self::Domain(_) => 3,
        })
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Config(format!("{}: {e}", path.display()))
    }
}

impl From<AcousticsError> for CliError {
    fn from(e: AcousticsError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Parse { .. } | SimError::Config(_) => Self::Config(e.to_string()),
            SimError::RosterShortfall(_) | SimError::Control(_) => Self::Domain(e.to_string()),
        }
    }
}

/// Line-anchored diagnostic for a JSON document that failed to parse.
pub fn parse_error(path: &std::path::Path, e: &serde_json::Error) -> CliError {
    CliError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}
