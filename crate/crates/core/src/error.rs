use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation requires the superohmic regime (s = 1/2, D = 2), got s = {s}, D = {dim}")]
    Regime { s: f64, dim: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("{what} = {value} exceeds enumeration capacity {limit}")]
    Capacity { what: &'static str, value: usize, limit: usize },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("correlator table has no entry for {kind} at r = ({rx}, {ry}), n = {n}")]
    MissingCorrelator { kind: &'static str, rx: f64, ry: f64, n: usize },

    #[error("operation needs a `{expected}` Hamiltonian, got `{got}`")]
    WrongForm { expected: &'static str, got: &'static str },

    #[error("spin value {value} at index {index} is not ±1")]
    NotASpin { index: usize, value: i8 },

    #[error("fidelity denominator {value:e} is degenerate")]
    Degenerate { value: f64 },

    #[error("summed weights are not real: |Im| = {imag:e} vs |Re| = {real:e}")]
    NotReal { imag: f64, real: f64 },

    #[error("J grid does not bracket a Binder cumulant crossing for sizes {small} and {large}")]
    NonBracketing { small: usize, large: usize },

    #[error("Monte Carlo estimate did not converge: standard error {std_error:e} above {threshold:e}")]
    NotConverged { std_error: f64, threshold: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Regime { .. } => "regime",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Capacity { .. } => "capacity",
            Error::Quadrature { .. } => "quadrature",
            Error::MissingCorrelator { .. } => "missing_correlator",
            Error::WrongForm { .. } => "wrong_form",
            Error::NotASpin { .. } => "not_a_spin",
            Error::Degenerate { .. } => "degenerate",
            Error::NotReal { .. } => "not_real",
            Error::NonBracketing { .. } => "non_bracketing",
            Error::NotConverged { .. } => "not_converged",
        }
    }
}
