use thiserror::Error;

/// Errors for kernel summation operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature did not converge to the requested tolerance.
    /// Carries the best value obtained so far.
    #[error("{context} did not converge (partial value {partial})")]
    Convergence { context: &'static str, partial: f64 },

    /// Caller violated an API contract (mismatched lengths, unsorted input,
    /// inconsistent scales).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration produced an unusable object (e.g. an empty Fourier
    /// coefficient set).
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested kernel/method combination is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Computing the exact oracle would exceed the configured budget.
    #[error("oracle budget exceeded: {pairs} kernel evaluations requested, budget is {budget}; raise the budget or skip the oracle explicitly")]
    OracleBudget { pairs: u128, budget: u128 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
