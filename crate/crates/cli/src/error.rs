use oit_core::OitError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] OitError),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    /// 0 success, 1 usage/config, 2 numerical failure, 3 validation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::ConfigLine { .. } | CliError::File { .. } => 1,
            CliError::Core(OitError::OrientationLoss { .. } | OitError::NumericalBlowup { .. }) => 2,
            CliError::Core(_) => 1,
            CliError::ValidationFailed(_) => 3,
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::File {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
