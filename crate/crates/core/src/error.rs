use thiserror::Error;

/// Failures raised by the pricing and surplus engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside its domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical blow-up at duration {duration:.6}")]
    NumericalBlowup { duration: f64 },
    #[error("zero premium-paying exposure")]
    ZeroExposure,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("grid alignment: {0}")]
    Alignment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
