use thiserror::Error;

use crate::code::CodeFamily;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid code distance {d} for {family}: {reason}")]
    InvalidDistance {
        family: CodeFamily,
        d: usize,
        reason: &'static str,
    },

    #[error("operation `{op}` does not support the {family} family")]
    UnsupportedFamily { op: &'static str, family: CodeFamily },

    #[error("invalid site {site}: {reason}")]
    InvalidSite { site: usize, reason: &'static str },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("enumeration bound exceeded: {count} {what} (limit {limit})")]
    EnumerationBound {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
