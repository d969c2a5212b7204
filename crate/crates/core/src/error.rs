use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the testbed. Episode outcomes (collision, timeout) are
/// not errors; they are reported through [`crate::harness::Metrics`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid obstacle #{index}: {reason}")]
    InvalidObstacle { index: usize, reason: String },

    #[error("ray direction is not unit length (norm = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse scenario {path}: {source}")]
    ScenarioParse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("malformed trajectory log: {0}")]
    Log(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("plot rendering failed: {0}")]
    Plot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
