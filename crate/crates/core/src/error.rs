use thiserror::Error;

use crate::MeterId;

/// Errors raised anywhere in the protocol pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("decode error: {0}")]
    Decode(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("discrete log not found in [{lo}, {hi}]")]
    DlogNotFound { lo: i64, hi: i64 },

    #[error("signature from meter {meter} failed verification")]
    Signature { meter: MeterId },

    #[error("stale timestamp from meter {meter}: expected {expected}, got {got}")]
    StaleTimestamp {
        meter: MeterId,
        expected: String,
        got: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no candidate left for miner election")]
    NoCandidate,

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient history: need at least {need} points, got {got}")]
    InsufficientHistory { need: usize, got: usize },

    #[error("misuse: {0}")]
    Misuse(&'static str),

    #[error("io error: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with a human-readable location such as `area 2, meter 17`.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
