use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("work budget exceeded: requires {required} units, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    #[error("precision error: {0}")]
    Precision(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Accuracy { tolerance: f64, estimate: f64 },

    #[error("verification mismatch: {0}")]
    Mismatch(String),

    #[error("numerical integrity violated: {0}")]
    NumericalIntegrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
