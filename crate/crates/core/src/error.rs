use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("cannot read config file {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("threshold `{0}` must be at least 1")]
    ZeroThreshold(&'static str),

    #[error("invalid glob `{pattern}`: {message}")]
    Glob { pattern: String, message: String },
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("scan root {} does not exist", .0.display())]
    RootMissing(PathBuf),

    #[error("scan root {} is not a directory", .0.display())]
    RootNotDirectory(PathBuf),

    #[error("cannot read scan root {}: {source}", path.display())]
    RootUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("cannot start worker pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Report(#[from] ReportError),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("finding refers to unknown file `{0}`")]
    UnknownPath(String),

    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}
