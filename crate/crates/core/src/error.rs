//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A computation hit a singular or degenerate configuration.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A request falls outside the span covered by the data.
    #[error("out of range: {0}")]
    Range(String),

    /// A fit did not converge or produced no usable resonance.
    #[error("fit failed: {0}")]
    Fit(String),

    /// A linear system or calibration kit is too ill-conditioned to solve.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// The data cannot distinguish the requested parameters.
    #[error("not identifiable: {0}")]
    Identifiability(String),

    /// Malformed input text.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
