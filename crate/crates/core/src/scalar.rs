//! Scalar abstraction so the numeric core works over `f32` or `f64`.

use std::fmt::Display;
use std::str::FromStr;

use num_traits::{FromPrimitive, NumCast};

/// Floating-point scalar the geometry, fitting, rendering, and loss math is
/// generic over. Implemented for `f32` and `f64`; concrete aliases for the
/// common monomorphizations live at the crate root.
pub trait Scalar:
    nalgebra::RealField + Copy + Default + FromPrimitive + NumCast + Display + FromStr
{
    /// Positive infinity, used as the empty-depth sentinel.
    const INF: Self;

    /// Conversion from `f64` (rounds to nearest for `f32`).
    fn of(v: f64) -> Self;

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64;

    /// Parse decimal text at this type's native precision.
    fn from_decimal_str(s: &str) -> Option<Self>;
}

impl Scalar for f32 {
    const INF: Self = f32::INFINITY;

    fn of(v: f64) -> Self {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    fn from_decimal_str(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Scalar for f64 {
    const INF: Self = f64::INFINITY;

    fn of(v: f64) -> Self {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }

    fn from_decimal_str(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}
