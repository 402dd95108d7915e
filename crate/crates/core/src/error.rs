//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation at (or numerically indistinguishable from) a pole.
    #[error("pole at {what}")]
    Pole { what: String },

    /// Argument outside the supported domain.
    #[error("domain error: {what}")]
    Domain { what: String },

    /// A quadrature or series failed to reach the requested tolerance.
    #[error("did not converge: {what}")]
    NoConvergence { what: String },

    /// A prime table does not cover the range a sum requires.
    #[error("prime coverage too small: need p <= {needed}, table ends at {have}")]
    Coverage { needed: u64, have: u64 },

    /// Family data violates a structural invariant (details itemized).
    #[error("invalid family data: {0}")]
    InvalidFamily(String),

    /// File or cache I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Canonical-format parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    /// Remote fetch failed (network disabled, miss, or schema mismatch).
    #[error("fetch error: {0}")]
    Fetch(String),
}

impl Error {
    pub(crate) fn pole(what: impl Into<String>) -> Self {
        Error::Pole { what: what.into() }
    }

    pub(crate) fn domain(what: impl Into<String>) -> Self {
        Error::Domain { what: what.into() }
    }

    pub(crate) fn no_convergence(what: impl Into<String>) -> Self {
        Error::NoConvergence { what: what.into() }
    }
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
