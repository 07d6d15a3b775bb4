use std::path::Path;

/// Command failure, split by exit code: 1 for bad input, 2 for failures
/// while running.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<hyperlasso::Error> for CliError {
    fn from(e: hyperlasso::Error) -> Self {
        use hyperlasso::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch(_) | E::EmptyChain => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub(crate) fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub(crate) fn invalid(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}
