//! Floating-point abstraction for the core math layer.
//!
//! Closed-form quantities (group law, gauge derivatives, hypergeometric series)
//! are generic over [`Scalar`] so they can be instantiated at `f32` or `f64`.
//! The heavier numerical drivers (grid solver, Monte Carlo, surface quadrature)
//! work with the concrete `f64` aliases exported from the crate root, where the
//! tolerances are calibrated.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the closed-form layer.
///
/// This is `num_traits::Float` plus constants, conversions from literals, and
/// the assign/sum operator bounds the implementations need. Implemented for
/// `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    ///
    /// Panics if the value is not representable (never happens for the finite
    /// constants used in this crate).
    fn real(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert to Scalar")
    }

    /// Converts a small unsigned integer (dimension, index, count).
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("small usize must convert to Scalar")
    }

    /// Converts a small signed integer.
    fn of_i32(v: i32) -> Self {
        Self::from_i32(v).expect("small i32 must convert to Scalar")
    }

    /// Lossy view as `f64` (exact for `f32`/`f64` inputs), for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64()
            .expect("Scalar value must be representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_round_trips_for_f64() {
        let v = <f64 as Scalar>::real(1.25);
        assert_eq!(v, 1.25, "f64 literal conversion must be exact");
        assert_eq!(v.as_f64(), 1.25);
    }

    #[test]
    fn literal_conversion_is_nearest_for_f32() {
        let v = <f32 as Scalar>::real(0.1);
        assert!(
            (v as f64 - 0.1).abs() < 1e-8,
            "f32 conversion should round to nearest: got {v}"
        );
    }

    #[test]
    fn integer_helpers_convert_small_values() {
        assert_eq!(<f64 as Scalar>::of_usize(7), 7.0);
        assert_eq!(<f64 as Scalar>::of_i32(-3), -3.0);
    }
}
