//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the analysis routines are generic over.
///
/// Implemented for `f32` and `f64`. Constants are written as `f64`
/// literals and converted with [`Scalar::of`].
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Display + Debug + Default + Send + Sync + 'static
{
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean in index order. Empty input yields NaN.
pub(crate) fn mean<T: Scalar>(xs: &[T]) -> T {
    let sum: T = xs.iter().copied().sum();
    sum / T::from_usize_lossy(xs.len())
}

/// Population (1/N) variance around the arithmetic mean.
pub(crate) fn population_variance<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    ss / T::from_usize_lossy(xs.len())
}
