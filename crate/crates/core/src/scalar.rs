//! Scalar abstraction shared by every signal-processing module.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar usable for DFTs and dense linear algebra.
pub trait Real: RealField + FftNum + FromPrimitive + ToPrimitive + Copy + Default {
    /// Converts an `f64` literal. Lossy for `f32`, exact for `f64`.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon as `f64`, used to scale tolerances per precision.
    fn epsilon_f64() -> f64;
}

impl Real for f64 {
    fn epsilon_f64() -> f64 {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn epsilon_f64() -> f64 {
        f32::EPSILON as f64
    }
}

/// Tolerance that is `base` in double precision and scales up with the
/// precision loss of narrower types.
pub(crate) fn scaled_tolerance<T: Real>(base: f64, size: usize) -> f64 {
    base.max(T::epsilon_f64() * 100.0 * size as f64)
}

/// Magnitude of a complex value for any [`Real`] scalar.
pub(crate) fn cabs<T: Real>(c: num_complex::Complex<T>) -> T {
    c.norm_sqr().sqrt()
}
