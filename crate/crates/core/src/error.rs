use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("divergent moment: {0}")]
    Divergent(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("non-finite integrand value at x = {0}")]
    Evaluation(f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn no_convergence(msg: impl Into<String>) -> Self {
        Error::NoConvergence(msg.into())
    }

    /// CLI exit code: 1 for bad input (including requests for divergent
    /// quantities), 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Divergent(_) => 1,
            Error::NoConvergence(_) | Error::Evaluation(_) => 2,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Divergent(_) => "divergent",
            Error::NoConvergence(_) => "no_convergence",
            Error::Evaluation(_) => "evaluation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
