use thiserror::Error;

/// Errors raised by the certification and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller combined options that do not fit together (e.g. a class-V
    /// bound requested for a map that is only backward contracting).
    #[error("usage error: {0}")]
    Usage(String),

    /// The request is well-posed but exceeds what the routine is built for.
    #[error("capability error: {0}")]
    Capability(String),

    /// A map or function failed validation; `witnesses` are sample points where
    /// the failure was observed.
    #[error("validation error: {message} (witnesses: {witnesses:?})")]
    Validation {
        message: String,
        witnesses: Vec<f64>,
    },

    /// A numerical inequality that must hold by theory was violated.
    #[error("inequality violated: {what}: lhs = {lhs:e} > rhs = {rhs:e}")]
    InequalityViolated { what: String, lhs: f64, rhs: f64 },

    /// Branch evaluation failed while assembling a discretized operator.
    #[error("branch {branch} failed at node {node} (x = {x}): {reason}")]
    Branch {
        node: usize,
        branch: usize,
        x: f64,
        reason: String,
    },

    #[error(
        "power iteration did not converge after {iterations} iterations (residuals {residuals:?})"
    )]
    Convergence {
        iterations: usize,
        residuals: (f64, f64),
    },

    #[error("invalid eigendata: {0}")]
    InvalidEigendata(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
