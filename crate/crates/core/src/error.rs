use std::path::PathBuf;

use thiserror::Error;

use crate::ClassId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("column {col} out of range for array with {cols} columns")]
    ColumnOutOfRange { col: usize, cols: usize },

    #[error("active column set is empty")]
    EmptyActiveSet,

    #[error("capacity exceeded: all {cols} columns allocated, cannot add class {class}")]
    CapacityExceeded { cols: usize, class: ClassId },

    #[error("memory holds no classes")]
    EmptyMemory,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("range violation at line {line}: {msg}")]
    RangeViolation { line: u64, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::ConfigInvalid(msg.into())
    }
}
