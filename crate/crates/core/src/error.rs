use thiserror::Error;

/// Errors raised by model construction, evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeaseError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("market has {true_len} true and {est_len} estimated operators; both must be equal and non-zero")]
    MarketShape { true_len: usize, est_len: usize },

    #[error("operator index {index} out of range for market of {len} operators")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operator {index} is not a member of the entrant set")]
    NotInSet { index: usize },

    #[error("revenue evaluation needs {terms} subset terms, above the budget of {budget}")]
    CombinatoricsBudget { terms: u128, budget: u128 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("an unbounded maximum lease duration requires a finite horizon cap")]
    UnboundedHorizon,

    #[error("homogeneous solver requires {0}")]
    NotHomogeneous(&'static str),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, LeaseError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> LeaseError {
    LeaseError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
