use thiserror::Error;

/// Errors produced by distribution construction and gap computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed distribution text or data file.
    #[error("parse error: {0}")]
    Parse(String),

    /// Parameters outside the admissible domain (nonpositive rate, L >= M, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller-supplied argument violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The adaptive quadrature exhausted its subdivision budget.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {abs_err:e})"
    )]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        abs_err: f64,
    },

    /// The Stieltjes representation needs a decreasing inverse hazard rate.
    #[error(
        "distribution does not have an increasing hazard rate: convexity of \
         the log-survival fails between {a} and {b} by {violation:e}"
    )]
    NotIhr { a: f64, b: f64, violation: f64 },

    /// A distribution function returned an unusable value.
    #[error("evaluation failure: {0}")]
    Evaluation(String),

    /// The ODE integrator could not make progress.
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
