use thiserror::Error;

use crate::geometry::ShapeKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape kind mismatch: {0:?} vs {1:?}")]
    KindMismatch(ShapeKind, ShapeKind),

    #[error("confidence score required but missing")]
    MissingScore,

    #[error("confidence score {0} outside (0, 1]")]
    ScoreOutOfRange(f64),

    #[error("cost matrix entry ({row}, {col}) = {value} is not a finite value in [0, 1]")]
    InvalidCost { row: usize, col: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),

    #[error("parameter axis must be strictly increasing (at index {0})")]
    NonMonotoneAxis(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no classes to average over")]
    EmptyClassList,

    #[error("total ground-truth count is zero")]
    ZeroGroundTruth,

    #[error("track sets are defined over different windows: {0:?} vs {1:?}")]
    WindowMismatch((i64, i64), (i64, i64)),

    #[error("duplicate track label {0}")]
    DuplicateLabel(u64),

    #[error("{path}: record {index}: {message}")]
    Record {
        path: String,
        index: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// IO failure on a named file.
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }

    /// Failures caused by the inputs (files, flags, parameters) rather than
    /// by the environment.
    pub fn is_input_error(&self) -> bool {
        use std::io::ErrorKind;
        match self {
            Error::Io(e) | Error::File { source: e, .. } => matches!(
                e.kind(),
                ErrorKind::NotFound | ErrorKind::PermissionDenied | ErrorKind::InvalidData
            ),
            _ => true,
        }
    }
}
