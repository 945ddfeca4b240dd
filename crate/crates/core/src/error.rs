use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("probability {name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "six-state averaging is only valid for quantities linear in the initial density matrix; \
         average the numerator and denominator separately instead"
    )]
    SixStateNonLinear,

    #[error("incompatible protocol configuration: {0}")]
    Incompatible(String),

    #[error("QEC is impossible for this configuration: {0}")]
    QecUnavailable(String),

    #[error("simulation invariant violated at t = {time} ns: {what}")]
    InvariantViolation { time: f64, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability<T: crate::Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_nan() || value < T::zero() || value > T::one() {
        return Err(Error::InvalidProbability {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}
