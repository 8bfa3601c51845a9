use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hour axis is not contiguous at index {index}")]
    NonContiguous { index: usize },

    #[error("not enough stations: need at least {needed}, got {got}")]
    NotEnoughStations { needed: usize, got: usize },

    #[error("too few variogram bins to fit a model ({got})")]
    TooFewBins { got: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("county `{0}` missing from static table")]
    MissingCounty(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    Convergence { iterations: usize, grad_norm: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("model bundle: {0}")]
    Bundle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for failures of numerical routines (as opposed to I/O or configuration).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotEnoughStations { .. }
                | Error::TooFewBins { .. }
                | Error::Degenerate(_)
                | Error::Convergence { .. }
                | Error::Numeric(_)
                | Error::Shape { .. }
        )
    }
}
