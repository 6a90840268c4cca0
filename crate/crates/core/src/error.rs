use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy loss: {0}")]
    AccuracyLoss(String),
    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence { what: String, iterations: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("resonance: {0}")]
    Resonance(String),
    #[error("truncation radius too small: {0}")]
    Truncation(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
