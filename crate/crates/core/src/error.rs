use thiserror::Error;

/// Errors raised by the samplers, simulators and estimators of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("step budget of {budget} embedded steps exhausted ({context})")]
    StepBudget { budget: u64, context: String },

    #[error("atom window exhausted at the {side} boundary")]
    WindowExhausted { side: &'static str },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("renewal truncation remainder {remainder:.4} exceeds tolerance {tolerance:.4}; increase J_max")]
    Truncation { remainder: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
