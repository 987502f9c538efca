use thiserror::Error;

use crate::solver::SolveStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmacError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel specification: {0}")]
    InvalidChannel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("blocklength {n} cannot keep a support of {support} points")]
    InfeasibleSupport { n: usize, support: usize },

    #[error("enumeration needs {needed} items, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("distribution puts mass where the metric is zero")]
    UnsupportedMass,

    #[error("no grid point satisfies the constraints")]
    EmptyFeasibleSet,

    #[error("solver failed in {context}: status {status:?}")]
    Solver {
        context: String,
        status: SolveStatus,
    },

    #[error("unsupported problem structure: {0}")]
    Unsupported(String),

    #[error("{count} grid points failed, first at index {first_index}: {first}")]
    GridFailures {
        count: usize,
        first_index: usize,
        first: Box<MmacError>,
    },
}

pub type Result<T> = std::result::Result<T, MmacError>;
