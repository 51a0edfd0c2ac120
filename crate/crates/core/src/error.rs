use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("query has no terms after stopword removal")]
    EmptyQuery,

    #[error("partition '{0}' contains no documents")]
    EmptyPartition(String),

    #[error("topic {topic} cannot be classified: {reason}")]
    Unclassifiable { topic: String, reason: String },

    #[error("topic {0} has no relevant documents in the qrels")]
    Unjudged(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index cache format version {found} does not match {expected}")]
    CacheVersion { found: u32, expected: u32 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end: 1 for usage problems,
    /// 2 for data and integrity problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            _ => 2,
        }
    }
}
