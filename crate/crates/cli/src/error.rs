use std::path::PathBuf;

use chainspread_core::propagator::BudgetViolation;
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or semantically invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Input files that are missing columns or cannot be parsed.
    #[error("input error: {0}")]
    Input(String),

    #[error(
        "boundary budget exceeded: wavefront at t = {} needs {} sites but only {} are available \
         (pass --allow-reflections to run anyway)",
        .0.t_max, .0.required, .0.available
    )]
    Budget(BudgetViolation),

    /// A verification or fit ran to completion and reported failures.
    #[error("{0}")]
    ChecksFailed(String),

    #[error(transparent)]
    Core(#[from] chainspread_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
