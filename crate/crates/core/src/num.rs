//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point scalar: `f32` or `f64`.
///
/// The tolerances scale with the precision of the type so the same
/// validation code can run in single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for validating caller-supplied gates and density matrices.
    fn input_tol() -> Self;

    /// Tolerance for normalization and for checks on self-produced values.
    fn strict_tol() -> Self;

    /// Below this |B| the rational-log closed forms switch to their moment series.
    fn series_cutoff() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn input_tol() -> Self {
        1e-10
    }
    fn strict_tol() -> Self {
        1e-12
    }
    fn series_cutoff() -> Self {
        0.5
    }
}

impl Real for f32 {
    fn input_tol() -> Self {
        1e-5
    }
    fn strict_tol() -> Self {
        1e-5
    }
    fn series_cutoff() -> Self {
        0.5
    }
}
