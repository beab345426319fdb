use thiserror::Error;

/// Failure classes shared by every stage of the estimator.
#[derive(Debug, Clone, PartialEq, Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error(
        "window around x = {center} with bandwidth {bandwidth} has {available} design points, need at least {required}"
    )]
    WindowTooSmall {
        center: f64,
        bandwidth: f64,
        available: usize,
        required: usize,
    },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("degenerate window: {0}")]
    DegenerateWindow(&'static str),
    #[error("argument {0} outside the domain of the function")]
    DomainError(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
