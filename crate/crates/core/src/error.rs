use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("unknown roll-call id {0:?}")]
    UnknownRollcall(String),

    #[error("empty graph")]
    EmptyGraph,

    #[error("graph too large for brute force: {n} nodes (max {max})")]
    TooLarge { n: usize, max: usize },

    #[error("node universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no common members between patterns {0:?} and {1:?}")]
    NoCommonMembers(String, String),

    #[error("measure undefined: {0}")]
    Undefined(String),

    #[error("{0} out of range: {1}")]
    OutOfRange(&'static str, String),

    #[error("empty cluster")]
    EmptyCluster,

    #[error("empty consensus graph: every voter was filtered out")]
    EmptyConsensus,

    #[error("invalid synthetic spec: {0}")]
    Synthetic(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
