use thiserror::Error;

/// Library-wide error type.
///
/// Variants under [`Error::is_validation`] correspond to rejected inputs;
/// the rest indicate numerical failures encountered mid-computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: max |H - H^dagger| entry {max_violation:.6e} exceeds tolerance {tolerance:.6e}")]
    NotHermitian { max_violation: f64, tolerance: f64 },

    #[error("dimension {dim} exceeds the dense-matrix limit {max}")]
    DimensionLimit { dim: usize, max: usize },

    #[error("entries must be finite")]
    NonFinite,

    #[error("seed operator has zero norm")]
    ZeroSeed,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size underflow at t = {t_last:.6e}; remaining range not covered")]
    StepSizeUnderflow { t_last: f64 },

    #[error("truncation cap {cap} exceeded; achieved tail mass {tail_mass:.3e}")]
    TruncationCap { cap: usize, tail_mass: f64 },

    #[error("phase residual {residual:.3e} at level {level} exceeds tolerance {tolerance:.3e}")]
    PhaseResidual {
        residual: f64,
        tolerance: f64,
        level: usize,
    },

    #[error("quantity undefined: {0}")]
    Undefined(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by rejected inputs rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotHermitian { .. }
                | Error::DimensionLimit { .. }
                | Error::NonFinite
                | Error::ZeroSeed
                | Error::InvalidInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
