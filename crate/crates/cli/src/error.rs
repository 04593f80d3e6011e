use std::process::ExitCode;

use mehler_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NonSymmetric(_)
            | CoreError::NotPsd(_)
            | CoreError::SingularAffineMode { .. }
            | CoreError::UnsupportedOrder(_)
            | CoreError::NoAffinePart
            | CoreError::AmbiguousSign { .. }
            | CoreError::DegenerateCoupling { .. } => CliError::Domain(msg),
            CoreError::NotConverged { .. } => CliError::NotConverged(msg),
            CoreError::DimensionMismatch { .. }
            | CoreError::NonpositiveTime(_)
            | CoreError::InvalidWindow { .. }
            | CoreError::CostGuard(_)
            | CoreError::InvalidGrid(_)
            | CoreError::InvalidField(_)
            | CoreError::InvalidProblem(_) => CliError::Config(msg),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.into())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let msg = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            _ => CliError::Config(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
