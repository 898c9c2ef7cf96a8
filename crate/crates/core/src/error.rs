use thiserror::Error;

use crate::lp::LpSolution;

pub type Result<T, E = L1Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum L1Error {
    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("subdivision limit of {limit} subintervals reached")]
    SubdivisionLimit { limit: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program hit the iteration limit after {iterations} iterations")]
    IterationLimit {
        iterations: usize,
        best: Box<LpSolution>,
    },

    #[error("dual certificate unavailable: solution is not optimal")]
    CertificateUnavailable,

    #[error("enumeration too large: {0} candidates")]
    TooLarge(u128),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("Newton step failed: {0}")]
    StepFailure(String),

    #[error("Remez exchange stalled: {0}")]
    ExchangeStalled(String),

    #[error("a continuous proxy is required for this operation")]
    RequiresProxy,
}
