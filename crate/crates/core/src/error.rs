use thiserror::Error;

use crate::quadrature::Endpoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or spec value violates a constraint.
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    /// An integral the operation depends on is infinite.
    #[error("{what} diverges at {}", endpoint_name(*.endpoint))]
    Divergent { what: String, endpoint: Option<Endpoint> },

    /// The requested operation has no implementation for this variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine could not reach its accuracy budget.
    #[error("numerical quality: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

fn endpoint_name(e: Option<Endpoint>) -> &'static str {
    match e {
        Some(Endpoint::Zero) => "0",
        Some(Endpoint::Infinity) => "infinity",
        None => "an unidentified endpoint",
    }
}

impl Error {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { key: key.into(), reason: reason.into() }
    }
}
