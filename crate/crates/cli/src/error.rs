use std::path::PathBuf;

use eseem_mc_core::Error as CoreError;

/// Process exit codes. Usage errors from argument parsing exit with 2.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 3;
    pub const NUMERIC: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Numeric(CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::InvalidArgument(_) => exit::CONFIG,
            CliError::Numeric(_) => exit::NUMERIC,
            CliError::Io { .. } | CliError::Format { .. } | CliError::Input(_) => exit::IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::AsymmetricTensor { .. } | CoreError::AboveNyquist { .. } => {
                CliError::InvalidArgument(e.to_string())
            }
            CoreError::DimensionMismatch { .. } | CoreError::UnmaskedEntry { .. } => CliError::Input(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
