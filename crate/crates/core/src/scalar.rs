//! Scalar abstraction for the exact single-qubit algebra.
//!
//! The operator algebra, noise trajectories and Pauli walks are written
//! against [`Real`] so they run in `f32` or `f64`. Statistical fitting and
//! tomography work in `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the qubit algebra.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Tolerance for structural checks (unitarity, Pauli matching, phase
    /// equivalence). Tight for `f64`, loose enough for `f32` round-off.
    fn check_tolerance() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn check_tolerance() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn check_tolerance() -> Self {
        1e-10
    }
}
