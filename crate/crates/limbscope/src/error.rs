use std::io;
use std::path::Path;

use thiserror::Error;

/// Ingestion failures; each names the file and, where it applies, the column and the
/// 1-based data row.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: io::Error,
    },
    #[error("manifest {file}: {message}")]
    Manifest { file: String, message: String },
    #[error("missing column '{column}' in {file}")]
    MissingColumn { file: String, column: String },
    #[error("irregular sampling: {file} row {row}")]
    IrregularSampling { file: String, row: usize },
    #[error("rate mismatch: {file} row {row}: spacing {spacing} s, expected {expected} s")]
    RateMismatch { file: String, row: usize, spacing: f64, expected: f64 },
    #[error("invalid value in {file} column '{column}' row {row}: {value}")]
    InvalidValue { file: String, column: String, row: usize, value: String },
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io { file: path.display().to_string(), source }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} '{id}' not found")]
    NotFound { kind: &'static str, id: String },
    #[error("invalid id '{0}': use letters, digits, '-', '_' or '.'")]
    InvalidId(String),
    #[error("invalid {kind}: {message}")]
    Invalid { kind: &'static str, message: String },
    #[error("storage i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("corrupt document {path}: {source}")]
    Corrupt {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("dangling brush reference: {0}")]
    DanglingBrush(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn invalid(kind: &'static str, message: impl Into<String>) -> Self {
        StoreError::Invalid { kind, message: message.into() }
    }
}
