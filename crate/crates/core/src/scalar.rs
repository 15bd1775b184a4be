//! Scalar abstraction shared by the numeric kernels.
//!
//! The formulas in [`crate::twin`], [`crate::biases`], [`crate::memory`] and
//! [`crate::experiment::stats`] are written once against [`Scalar`] and work
//! for `f32` and `f64`. The simulation engine itself runs on `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance suitable for equality checks at this precision.
    fn rel_eps() -> Self;
}

impl Scalar for f32 {
    fn rel_eps() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn rel_eps() -> Self {
        1e-12
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25f32);
    }

    #[test]
    fn approx_eq_is_relative() {
        assert!(approx_eq(1e9, 1e9 + 1e-4, 1e-12));
        assert!(!approx_eq(1.0, 1.0 + 1e-9, 1e-12));
    }
}
