use thiserror::Error;

use crate::edit::Diagnostic;
use crate::label::SemanticLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid semantic label id {0}")]
    InvalidLabel(u8),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("palette has no entry for label {0}")]
    MissingPaletteEntry(SemanticLabel),

    #[error("edit script rejected with {} diagnostic(s): {}", .0.len(), summarize(.0))]
    InvalidScript(Vec<Diagnostic>),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dims(what: &'static str, expected: impl std::fmt::Debug, got: impl std::fmt::Debug) -> Self {
        Error::DimMismatch {
            what,
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
        }
    }
}

/// Decoding failures for the on-disk formats. Each variant is a distinct
/// diagnostic so callers can tell truncation from corruption.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("{format}: bad magic, expected {expected:?}, found {found:?}")]
    MagicMismatch {
        format: &'static str,
        expected: Vec<u8>,
        found: Vec<u8>,
    },

    #[error("{format}: truncated in {section}, need {needed} bytes but only {available} remain")]
    Truncated {
        format: &'static str,
        section: &'static str,
        needed: u64,
        available: u64,
    },

    #[error("{format}: dimension {axis} is zero")]
    ZeroDim { format: &'static str, axis: &'static str },

    #[error("{format}: dimensions {dims:?} overflow the addressable size")]
    DimOverflow { format: &'static str, dims: Vec<u32> },

    #[error("{format}: invalid label {value} at byte offset {offset}")]
    InvalidLabel {
        format: &'static str,
        offset: u64,
        value: u8,
    },

    #[error("{format}: invalid {field}: {reason}")]
    InvalidValue {
        format: &'static str,
        field: &'static str,
        reason: String,
    },

    #[error("{format}: {count} trailing bytes after payload")]
    TrailingBytes { format: &'static str, count: u64 },

    #[error("{format}: malformed JSON: {reason}")]
    Json { format: &'static str, reason: String },
}
