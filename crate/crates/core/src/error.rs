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

    #[error("missing required file {0}")]
    MissingFile(PathBuf),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{file}:{line}: {kind} id {id} is not declared")]
    UndeclaredId {
        file: PathBuf,
        line: usize,
        kind: &'static str,
        id: String,
    },

    #[error("invalid seed alignment: {0}")]
    InvalidSeeds(String),

    #[error("degenerate split: {train} train / {test} test pairs")]
    DegenerateSplit { train: usize, test: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported subgraph network order {0} (only first order is implemented)")]
    UnsupportedOrder(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("backward called without a forward cache for graph {0}")]
    MissingCache(usize),

    #[error("training diverged at epoch {epoch} ({channel}): {detail}")]
    Diverged {
        epoch: usize,
        channel: String,
        detail: String,
    },

    #[error("cannot sample negatives: {0}")]
    Sampling(String),

    #[error("unknown entity id {0}")]
    UnknownEntity(usize),

    #[error("missing embeddings for channel {0}")]
    MissingChannel(&'static str),

    #[error("empty test set")]
    EmptyTestSet,

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable category used by the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } | Error::MissingFile(_) => "io",
            Error::Parse { .. } | Error::UndeclaredId { .. } => "parse",
            Error::InvalidSeeds(_)
            | Error::DegenerateSplit { .. }
            | Error::InvalidSpec(_)
            | Error::UnsupportedOrder(_)
            | Error::Config(_) => "config",
            Error::Dimension(_) | Error::NegativeEntry { .. } | Error::MissingCache(_) => {
                "dimension"
            }
            Error::NonFinite(_) | Error::Diverged { .. } => "numeric",
            Error::Sampling(_) => "sampling",
            Error::UnknownEntity(_) | Error::MissingChannel(_) | Error::EmptyTestSet => "eval",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
