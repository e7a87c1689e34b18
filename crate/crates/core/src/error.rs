use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("invalid spectral weight: {0}")]
    InvalidWeight(String),

    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),

    #[error("fit window has {samples} samples, at least {min} required")]
    WindowTooNarrow { samples: usize, min: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("truncation leak: top-level population {population:e} exceeds {tolerance:e} at t = {t}")]
    TruncationLeak { population: f64, tolerance: f64, t: f64 },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("broadening width {sigma} is smaller than the grid step {step}")]
    BroadeningTooSmall { sigma: f64, step: f64 },

    #[error("fit window outside grid: {0}")]
    WindowOutsideGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma_t = {gamma} exceeds the false-decoherence bound {bound} at t = {t}")]
    BoundViolated { t: f64, gamma: f64, bound: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailed(String),
}

impl Error {
    /// Stable variant name, used by the command-line driver on standard error.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::NonPositiveFrequency(_) => "NonPositiveFrequency",
            Error::WindowTooNarrow { .. } => "WindowTooNarrow",
            Error::GridMismatch(_) => "GridMismatch",
            Error::StepTooLarge(_) => "StepTooLarge",
            Error::TruncationLeak { .. } => "TruncationLeak",
            Error::InvalidTarget(_) => "InvalidTarget",
            Error::InvalidSize(_) => "InvalidSize",
            Error::BroadeningTooSmall { .. } => "BroadeningTooSmall",
            Error::WindowOutsideGrid(_) => "WindowOutsideGrid",
            Error::InvalidState(_) => "InvalidState",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::BoundViolated { .. } => "BoundViolated",
            Error::QuadratureFailed(_) => "QuadratureFailed",
        }
    }

    /// True for errors caused by malformed inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidWeight(_)
                | Error::InvalidTarget(_)
                | Error::InvalidSize(_)
                | Error::InvalidState(_)
                | Error::InvalidParameter(_)
                | Error::GridMismatch(_)
                | Error::NonPositiveFrequency(_)
                | Error::WindowTooNarrow { .. }
                | Error::WindowOutsideGrid(_)
                | Error::BroadeningTooSmall { .. }
                | Error::StepTooLarge(_)
        )
    }
}
