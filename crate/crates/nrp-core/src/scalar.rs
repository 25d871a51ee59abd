//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the numeric kernels are generic over.
///
/// Implemented by `f32` and `f64`. `LinalgScalar` routes `ndarray` matrix
/// products through its fast dense kernels for both types.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + LinalgScalar
    + ScalarOperand
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion from `f64` constants.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    /// Shorthand for `1/n` style constants.
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize conversion")
    }
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + LinalgScalar
        + ScalarOperand
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm<F: Scalar>(xs: &[F]) -> F {
        xs.iter().map(|&x| x * x).sum::<F>().sqrt()
    }

    #[test]
    fn works_for_both_widths() {
        assert!((norm(&[3.0f32, 4.0]) - 5.0).abs() < 1e-6);
        assert!((norm(&[3.0f64, 4.0]) - 5.0).abs() < 1e-12);
    }
}
