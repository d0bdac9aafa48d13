use std::path::PathBuf;

use thiserror::Error;

use crate::stats::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature vector has norm {norm:e}; refusing to normalize a zero vector")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown class {0}")]
    UnknownClass(Label),

    #[error("model has not been trained on any sample")]
    EmptyModel,

    #[error("sample {0:?} has no label")]
    MissingLabel(String),

    #[error("regularized covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("value out of domain: {0}")]
    DomainError(String),

    #[error("manifest sample {sample_id:?} is missing field `{field}`")]
    ManifestMissingField { field: &'static str, sample_id: String },

    #[error("manifest row_index {row_index} of sample {sample_id:?} is out of range (feature rows: {rows})")]
    DanglingRowIndex { sample_id: String, row_index: u64, rows: u64 },

    #[error("manifest row_index {row_index} is used by more than one sample")]
    DuplicateRowIndex { row_index: u64 },

    #[error("{path}: bad magic at byte 0: expected \"EXLLFEAT\", found {found:?}")]
    BadMagic { path: PathBuf, found: Vec<u8> },

    #[error("{path}: unsupported {what} {found} at byte {offset}")]
    VersionUnsupported { path: PathBuf, what: &'static str, found: u64, offset: u64 },

    #[error("{path}: truncated payload: expected {expected} bytes, found {actual} (header is {header} bytes)")]
    TruncatedPayload { path: PathBuf, expected: u64, actual: u64, header: u64 },

    #[error("{path}: {extra} unexpected trailing bytes after payload ending at byte {offset}")]
    TrailingBytes { path: PathBuf, extra: u64, offset: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, #[source] source: std::io::Error },

    #[error("{context}: {source}")]
    Json { context: String, #[source] source: serde_json::Error },
}

impl Error {
    /// Stable, machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroVector { .. } => "ZeroVector",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownClass(_) => "UnknownClass",
            Error::EmptyModel => "EmptyModel",
            Error::MissingLabel(_) => "MissingLabel",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::DomainError(_) => "DomainError",
            Error::ManifestMissingField { .. } => "ManifestMissingField",
            Error::DanglingRowIndex { .. } => "DanglingRowIndex",
            Error::DuplicateRowIndex { .. } => "DuplicateRowIndex",
            Error::BadMagic { .. } => "BadMagic",
            Error::VersionUnsupported { .. } => "VersionUnsupported",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::TrailingBytes { .. } => "TrailingBytes",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Invariant(_) => "Invariant",
            Error::Io { .. } => "Io",
            Error::Json { .. } => "Json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json { context: context.into(), source }
    }
}
