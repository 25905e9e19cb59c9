//! Floating point scalars the numerical core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type for amplitudes, density matrices and statistics: `f32` or `f64`.
///
/// `tol` is the absolute tolerance used for the structural checks
/// (Hermiticity, unit trace, positivity). The `f64` value is the one the
/// tolerances throughout the crate are quoted in; `f32` gets a looser value
/// so the same code paths stay usable at single precision.
pub trait Real:
    nalgebra::RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    fn tol() -> Self;

    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn tol() -> Self {
        2e-5
    }
}
