use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planning and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("{0}")]
    Input(String),

    /// A text file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A batch cannot be made to fit the memory budget.
    #[error("vertex {vertex} needs {required_bytes} bytes, budget is {budget_bytes}")]
    Capacity {
        vertex: u32,
        required_bytes: u64,
        budget_bytes: u64,
    },

    /// An operation was asked for a guarantee its inputs cannot provide.
    #[error("{0}")]
    Contract(String),

    /// Two independent accounting routes disagree.
    #[error("{0}")]
    Consistency(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used in `ERROR <category>: <detail>` lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Parse { .. } => "parse",
            Error::Capacity { .. } => "capacity",
            Error::Contract(_) => "contract",
            Error::Consistency(_) => "consistency",
            Error::Io { .. } => "io",
            Error::Json(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
