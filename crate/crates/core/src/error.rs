use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// `theta * zeta > hbar^2`: the gauge constraint has no real solution.
    #[error("no real gauge for theta = {theta}, zeta = {zeta}, hbar = {hbar}")]
    NoRealGauge { theta: f64, zeta: f64, hbar: f64 },

    #[error("degenerate coefficients: {0}")]
    DegenerateCoefficients(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Quadrature normalisation drifted too far from one.
    #[error("grid under-resolved: normalisation {norm} deviates from 1 by more than {tolerance}")]
    GridResolution { norm: f64, tolerance: f64 },

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("number-basis truncation too coarse: trace deficit {deficit:e} exceeds {limit:e} at cutoff {cutoff}")]
    Truncation { deficit: f64, limit: f64, cutoff: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
