use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("architecture error: {0}")]
    Architecture(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("config error at {field}: {msg}")]
    Config { field: String, msg: String },
    #[error("empty coalition must go through utility layer")]
    EmptyCoalition,
    #[error("undefined reward split: attribution total is zero")]
    UndefinedSplit,
    #[error("comparability error: {0}")]
    Comparability(String),
}

impl Error {
    /// CLI exit code: 2 for config-ish failures, 3 for capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            _ => 2,
        }
    }
}
