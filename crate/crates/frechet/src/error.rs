//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by space, term and interpreter operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value does not have the shape an operation requires.
    #[error("shape error: {0}")]
    Shape(String),

    /// A term does not type-check. `path` locates the offending subterm
    /// (e.g. "comp.lhs.par[2]").
    #[error("type error at {path}: {reason}")]
    Type { path: String, reason: String },

    /// A primitive was evaluated outside its domain (e.g. ln of a
    /// non-positive number).
    #[error("domain error: {0}")]
    Domain(String),

    /// An index or coordinate length is out of range.
    #[error("dimension error: {0}")]
    Dim(String),

    /// Source text could not be parsed.
    #[error("parse error at {line}:{col}: expected {expected}")]
    Parse {
        line: usize,
        col: usize,
        expected: String,
    },
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn ty(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Type {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dim(msg.into())
    }

    /// Prefixes `segment` onto the path of a type error; other errors are
    /// passed through unchanged.
    pub fn in_path(self, segment: &str) -> Self {
        match self {
            Error::Type { path, reason } => Error::Type {
                path: if path.is_empty() {
                    segment.to_string()
                } else {
                    format!("{segment}.{path}")
                },
                reason,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
