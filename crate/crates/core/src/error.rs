//! Crate-wide error type and the stable CLI exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate anchor configuration: {0}")]
    Degenerate(String),

    #[error("inconsistent manifest: {0}")]
    InconsistentManifest(String),

    #[error("pair mining failed: {0}")]
    Mining(String),

    #[error("training diverged at step {step}: loss is not finite")]
    TrainingDiverged { step: usize },

    #[error("empty protocol: {0}")]
    EmptyProtocol(String),

    #[error("no embedding found for image `{0}`")]
    MissingEmbedding(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate path in manifest: `{0}`")]
    DuplicatePath(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code contract: 1 usage, 2 data, 3 numerical/convergence.
    /// Usage errors (bad flags) are produced by the CLI itself, so every
    /// library error maps to 2 or 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate(_) | Error::TrainingDiverged { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
