use thiserror::Error;

/// Process exit status of a finished command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EVALUATOR: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("evaluator failure: {0}")]
    Evaluator(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Evaluator(_) => EXIT_EVALUATOR,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<nflbo::Error> for CliError {
    fn from(e: nflbo::Error) -> Self {
        match e {
            nflbo::Error::Evaluator(inner) => CliError::Evaluator(inner.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<nflbo::nflt::NfltError> for CliError {
    fn from(e: nflbo::nflt::NfltError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<nflbo::gp::GpError> for CliError {
    fn from(e: nflbo::gp::GpError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
