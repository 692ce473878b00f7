//! Error types shared by every module.

use std::fmt;

/// Location and expectation data for a rejected expression source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    /// Byte offset into the source text.
    pub offset: usize,
    pub message: String,
    /// Short summary of what the parser would have accepted.
    pub expected: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {} (expected {})", self.message, self.offset, self.expected)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(ParseDiagnostic),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("admissibility error: {0}")]
    Admissibility(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Domain(_) | Error::Admissibility(_) => 3,
            Error::Numerical(_) | Error::Inconclusive(_) => 4,
            Error::Invariant(_) => 5,
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
