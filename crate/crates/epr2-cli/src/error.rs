use std::path::Path;

use thiserror::Error;

/// Failure modes mapped one-to-one onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, malformed config files, impossible grids. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// The sweep ran but rows failed their checks. Exit 1; the payload
    /// is a machine-readable JSON summary destined for stderr.
    #[error("{0}")]
    Validation(String),
    /// Filesystem trouble, reported with the offending path. Exit 3.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<epr2::Error> for CliError {
    fn from(e: epr2::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
