use l1rec_core::L1Error;
use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Core(#[from] L1Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) | CliError::Domain(_) => 2,
            CliError::Core(e) => match e {
                L1Error::DomainError(_)
                | L1Error::InvalidInput(_)
                | L1Error::NotFound(_)
                | L1Error::TooLarge(_)
                | L1Error::RequiresProxy => 2,
                L1Error::NoConvergence(_)
                | L1Error::SubdivisionLimit { .. }
                | L1Error::IterationLimit { .. }
                | L1Error::CertificateUnavailable
                | L1Error::StepFailure(_)
                | L1Error::ExchangeStalled(_) => 3,
            },
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
