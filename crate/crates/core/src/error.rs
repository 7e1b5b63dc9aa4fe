use alloc::boxed::Box;
use alloc::string::String;

use crate::calibrate::FitResult;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// An argument (not a model parameter) is outside the domain of the operation.
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("insufficient data: need at least {needed}, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("root finder did not converge within {iterations} iterations")]
    RootNotConverged { iterations: usize },
    /// Every optimizer start failed; `best` carries the best point seen, if any was finite.
    #[error("optimizer failed to converge from all {starts} starts")]
    NotConverged {
        starts: usize,
        best: Option<Box<FitResult>>,
    },
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
