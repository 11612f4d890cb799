use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A system or decoder parameter is outside its allowed range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numeric argument is outside the domain of the operation.
    #[error("invalid input: {0}")]
    Input(String),

    /// A series did not converge within its term cap.
    #[error("series did not converge: {0}")]
    NonConvergence(String),

    /// Simulation and theory records do not share a grid.
    #[error("record grids do not match: {0}")]
    GridMismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
