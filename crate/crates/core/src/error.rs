use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("malformed file {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("no valid pixels to evaluate")]
    NoValidPixels,

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probability sum {sum} at pixel {pixel} is outside 1 +/- {tolerance}")]
    ProbabilitySum {
        pixel: usize,
        sum: f64,
        tolerance: f64,
    },

    #[error("inpainting failed: every pixel is masked or invalid")]
    NothingKnown,

    #[error("inpainting did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no supervised rays in batch")]
    NoSupervisedRays,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("every frame was skipped")]
    AllFramesSkipped,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            message: message.into(),
        }
    }
}
