use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparsimError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row:?}, column {column:?}: cannot parse {text:?} as a finite number")]
    BadValue {
        row: String,
        column: String,
        text: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("column {0} has no observed values")]
    EmptyColumn(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("grid cell {cell} failed: {source}")]
    GridCell {
        cell: String,
        #[source]
        source: Box<SparsimError>,
    },
}

pub type Result<T> = std::result::Result<T, SparsimError>;

impl SparsimError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SparsimError::Io {
            path: path.into(),
            source,
        }
    }
}
