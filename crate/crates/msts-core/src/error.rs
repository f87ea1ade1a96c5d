use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Violation of the `.ts` time-series format. Line numbers are 1-based.
    #[error("ts parse error at line {line}: {msg}")]
    TsParse { line: usize, msg: String },

    /// Violation of the tabular CSV format. Line numbers are 1-based.
    #[error("tabular parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    /// Train and test datasets disagree on features, length, or classes.
    #[error("train/test schema mismatch: {0}")]
    SchemaMismatch(String),

    /// A caller-supplied parameter is out of its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The distance cache file is unreadable as written (bad magic,
    /// truncation, size disagreement).
    #[error("cache format error: {0}")]
    CacheFormat(String),

    /// The cache was built from different data or warping parameters.
    #[error("cache fingerprint mismatch: cache has {found:#018x}, current inputs give {expected:#018x}")]
    FingerprintMismatch { expected: u64, found: u64 },
}
