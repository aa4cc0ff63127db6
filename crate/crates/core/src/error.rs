use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular basis (|det| = {0:e})")]
    SingularBasis(f64),

    #[error("basis condition estimate {estimate:e} exceeds bound {bound:e}")]
    IllConditioned { estimate: f64, bound: f64 },

    #[error("resource cap exceeded: {what} needs about {needed:e}, cap is {cap}")]
    ResourceCap { what: &'static str, needed: f64, cap: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certification failed: {0}")]
    Uncertified(String),

    #[error("weight is nonzero outside the window (|f| = {value:e} at {at:?})")]
    SupportViolation { at: Vec<f64>, value: f64 },

    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),

    #[error("quadrature did not converge: error bound {bound:e} after {evaluations} evaluations")]
    Quadrature { bound: f64, evaluations: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the failure is resource exhaustion rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
