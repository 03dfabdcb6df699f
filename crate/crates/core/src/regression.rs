//! Ordinary least squares for a straight line.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope, `sqrt(SSR / (n-2) / Sxx)`.
    pub slope_err: T,
    pub r2: T,
    pub n: usize,
}

/// Fits `y = intercept + slope * x`. Needs at least `min_points` pairs.
pub fn fit_line<T: Scalar>(x: &[T], y: &[T], min_points: usize) -> Result<LineFit<T>> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let needed = min_points.max(2);
    if n < needed {
        return Err(Error::InsufficientPoints { needed, got: n });
    }
    let nf = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateRegressor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: T = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let slope_err = if n > 2 { (ssr / T::from_usize_lossy(n - 2) / sxx).sqrt() } else { T::zero() };
    let r2 = if syy > T::zero() { (T::one() - ssr / syy).max(T::zero()) } else { T::one() };
    Ok(LineFit { slope, intercept, slope_err, r2, n })
}
