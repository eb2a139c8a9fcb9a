use thiserror::Error;

use crate::vecsched::VsFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An assignment or job reference that does not fit the instance.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An exact computation would exceed its configured budget.
    #[error("capacity exceeded: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("threshold search failed: {0}")]
    Search(String),

    /// The scheduler returned a schedule above its own guarantee.
    #[error("schedule makespan {makespan} exceeds its certificate bound {bound}")]
    Uncertified { makespan: f64, bound: f64 },

    #[error(transparent)]
    Failure(#[from] VsFailure),
}

impl Error {
    pub(crate) fn capacity(what: &'static str, needed: u128, budget: u128) -> Self {
        Error::Capacity {
            what,
            needed,
            budget,
        }
    }
}
