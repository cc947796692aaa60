use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite potential {value} at z = {z} nm")]
    NonFinitePotential { z: f64, value: f64 },

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("eigenpair {index} did not converge")]
    NotConverged { index: usize },

    #[error("state is not bound: {0}")]
    Unbound(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{value} nm is outside the tabulated thickness range [{lo}, {hi}] nm")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("energy curve has unbound knots at L = {0:?} nm")]
    UnboundKnots(Vec<f64>),

    #[error("spline misses direct solve by {error:.3e} meV at L = {thickness} nm (budget {budget:e} meV)")]
    SplineValidation { thickness: f64, error: f64, budget: f64 },

    #[error("harmonic model invalid: {0}")]
    ModelInvalid(String),

    #[error("cannot parse quantity: {0}")]
    Parse(String),
}
