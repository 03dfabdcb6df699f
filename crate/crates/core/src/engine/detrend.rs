//! Least-squares polynomial detrending of profile segments.
//!
//! Abscissae `i = 1..s` are mapped onto `t in [-1, 1]` and the monomials
//! `t^0..t^m` are orthonormalised once per `(s, m)` with two passes of
//! modified Gram-Schmidt. Fitting a segment is then a projection, which
//! stays well conditioned for segment lengths in the thousands.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Orthonormal polynomial basis on `s` equally spaced points.
#[derive(Debug, Clone)]
pub struct PolyBasis<T> {
    len: usize,
    order: usize,
    /// Column-major `len x (order + 1)`.
    q: Vec<T>,
    /// Upper triangular `(order + 1) x (order + 1)`, row-major; `V = Q R`.
    r: Vec<T>,
    center: T,
    half_width: T,
}

impl<T: Scalar> PolyBasis<T> {
    pub fn new(len: usize, order: usize) -> Result<Self> {
        if len < order + 2 {
            return Err(Error::InvalidArgument(format!("segment length {len} is below order + 2 = {}", order + 2)));
        }
        let k = order + 1;
        let center = T::from_usize_lossy(len + 1) / T::of(2.0);
        let half_width = T::from_usize_lossy(len - 1) / T::of(2.0);
        let t: Vec<T> = (1..=len).map(|i| (T::from_usize_lossy(i) - center) / half_width).collect();

        let mut q = vec![T::zero(); len * k];
        let mut r = vec![T::zero(); k * k];
        for j in 0..k {
            let mut v: Vec<T> = t.iter().map(|&ti| ti.powi(j as i32)).collect();
            let original_norm = norm(&v);
            for _pass in 0..2 {
                for p in 0..j {
                    let col = &q[p * len..(p + 1) * len];
                    let proj = dot(col, &v);
                    r[p * k + j] = r[p * k + j] + proj;
                    for (vi, &ci) in v.iter_mut().zip(col) {
                        *vi = *vi - proj * ci;
                    }
                }
            }
            let nv = norm(&v);
            if !(nv > original_norm * T::of(1e-10)) {
                return Err(Error::DegenerateFit { len, order });
            }
            r[j * k + j] = nv;
            for (dst, &vi) in q[j * len..(j + 1) * len].iter_mut().zip(&v) {
                *dst = vi / nv;
            }
        }
        Ok(Self { len, order, q, r, center, half_width })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn column(&self, j: usize) -> &[T] {
        &self.q[j * self.len..(j + 1) * self.len]
    }

    /// `(1/s) * sum of squared residuals` after removing the best fit.
    ///
    /// Results at rounding level, below `(1024 eps max|y|)^2`, are returned
    /// as exactly zero so that exactly polynomial stretches are recognised
    /// as degenerate.
    pub fn residual_variance(&self, segment: &[T]) -> T {
        debug_assert_eq!(segment.len(), self.len);
        let magnitude = segment.iter().fold(T::zero(), |m, &y| m.max(y.abs()));
        let mut resid = segment.to_vec();
        for j in 0..=self.order {
            let col = self.column(j);
            let c = dot(col, &resid);
            for (ri, &qi) in resid.iter_mut().zip(col) {
                *ri = *ri - c * qi;
            }
        }
        let variance = resid.iter().map(|&x| x * x).sum::<T>() / T::from_usize_lossy(self.len);
        let floor = T::of(1024.0) * T::epsilon() * magnitude;
        if variance <= floor * floor {
            T::zero()
        } else {
            variance
        }
    }

    pub fn fit(&self, segment: &[T]) -> Result<PolyFit<T>> {
        if segment.len() != self.len {
            return Err(Error::InvalidArgument(format!(
                "segment has {} values, basis expects {}",
                segment.len(),
                self.len
            )));
        }
        let k = self.order + 1;
        let proj: Vec<T> = (0..k).map(|j| dot(self.column(j), segment)).collect();
        // Back substitution R * beta = Q^T y.
        let mut beta = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = proj[i];
            for j in i + 1..k {
                acc = acc - self.r[i * k + j] * beta[j];
            }
            beta[i] = acc / self.r[i * k + i];
        }
        let fit = PolyFit {
            coefficients: beta,
            center: self.center,
            half_width: self.half_width,
            residual_variance: T::zero(),
        };
        let rss: T = segment
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let e = y - fit.eval(i + 1);
                e * e
            })
            .sum();
        Ok(PolyFit { residual_variance: rss / T::from_usize_lossy(self.len), ..fit })
    }
}

/// Fitted polynomial `sum_j c_j t^j` with `t = (i - center) / half_width`,
/// `i` the 1-based index within the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit<T> {
    pub coefficients: Vec<T>,
    pub center: T,
    pub half_width: T,
    pub residual_variance: T,
}

impl<T: Scalar> PolyFit<T> {
    pub fn eval(&self, index: usize) -> T {
        let t = (T::from_usize_lossy(index) - self.center) / self.half_width;
        self.coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    /// Residual sum of squares of an arbitrary coefficient vector.
    pub fn rss_with(&self, segment: &[T], coefficients: &[T]) -> T {
        let probe = PolyFit { coefficients: coefficients.to_vec(), ..self.clone() };
        segment
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let e = y - probe.eval(i + 1);
                e * e
            })
            .sum()
    }
}

/// Order-`m` least-squares fit of one segment.
pub fn detrend_segment<T: Scalar>(segment: &[T], order: usize) -> Result<PolyFit<T>> {
    PolyBasis::new(segment.len(), order)?.fit(segment)
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn exact_fits_have_zero_variance() {
        let f = detrend_segment(&[2.0, 4.0, 6.0, 8.0], 1).unwrap();
        assert_abs_diff_eq!(f.residual_variance, 0.0, epsilon = 1e-24);
        let f = detrend_segment(&[1.0, 4.0, 9.0, 16.0, 25.0], 2).unwrap();
        assert_abs_diff_eq!(f.residual_variance, 0.0, epsilon = 1e-24);
        for (i, y) in [1.0, 4.0, 9.0, 16.0, 25.0].iter().enumerate() {
            assert_abs_diff_eq!(f.eval(i + 1), *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_fit_of_alternating() {
        let f = detrend_segment(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 0).unwrap();
        assert_abs_diff_eq!(f.residual_variance, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f.coefficients[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_short_segments() {
        assert!(detrend_segment(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn long_segment_cubic_is_exact() {
        // Raw monomials on 1..3000 would be hopeless at order 3.
        let s = 3000;
        let y: Vec<f64> = (1..=s)
            .map(|i| {
                let x = i as f64;
                1e-6 * x * x * x - 0.01 * x * x + 3.0 * x - 7.0
            })
            .collect();
        let basis = PolyBasis::new(s, 3).unwrap();
        let scale = y.iter().map(|v| v * v).sum::<f64>() / s as f64;
        assert!(basis.residual_variance(&y) < 1e-20 * scale);
        assert_eq!(basis.residual_variance(&y), 0.0);
    }

    #[test]
    fn projection_and_explicit_fit_agree() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 7919) % 31) as f64 - 15.0).collect();
        let basis = PolyBasis::new(40, 2).unwrap();
        let fit = basis.fit(&y).unwrap();
        assert_abs_diff_eq!(fit.residual_variance, basis.residual_variance(&y), epsilon = 1e-10);
    }

    /// Brute-force normal equations in the scaled abscissa, order 2.
    fn normal_equation_rss(y: &[f64]) -> f64 {
        let s = y.len();
        let c = (s as f64 + 1.0) / 2.0;
        let h = (s as f64 - 1.0) / 2.0;
        let t: Vec<f64> = (1..=s).map(|i| (i as f64 - c) / h).collect();
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for (ti, yi) in t.iter().zip(y) {
            let phi = [1.0, *ti, ti * ti];
            for r in 0..3 {
                b[r] += phi[r] * yi;
                for k in 0..3 {
                    a[r][k] += phi[r] * phi[k];
                }
            }
        }
        // Gaussian elimination, 3x3.
        for p in 0..3 {
            for r in p + 1..3 {
                let f = a[r][p] / a[p][p];
                for k in p..3 {
                    a[r][k] -= f * a[p][k];
                }
                b[r] -= f * b[p];
            }
        }
        let mut x = [0.0; 3];
        for r in (0..3).rev() {
            x[r] = (b[r] - (r + 1..3).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
        }
        t.iter().zip(y).map(|(ti, yi)| (yi - x[0] - x[1] * ti - x[2] * ti * ti).powi(2)).sum()
    }

    proptest! {
        #[test]
        fn perturbing_coefficients_never_lowers_rss(
            y in proptest::collection::vec(-100.0f64..100.0, 5..60),
            order in 0usize..3,
        ) {
            prop_assume!(y.len() >= order + 2);
            let fit = detrend_segment(&y, order).unwrap();
            let base = fit.rss_with(&y, &fit.coefficients);
            for j in 0..fit.coefficients.len() {
                for delta in [1e-3, -1e-3] {
                    let mut c = fit.coefficients.clone();
                    c[j] += delta;
                    prop_assert!(fit.rss_with(&y, &c) >= base - 1e-9 * (1.0 + base));
                }
            }
        }

        #[test]
        fn matches_normal_equations(y in proptest::collection::vec(-10.0f64..10.0, 4..50)) {
            let fit = detrend_segment(&y, 2).unwrap();
            let rss = fit.residual_variance * y.len() as f64;
            let oracle = normal_equation_rss(&y);
            prop_assert!((rss - oracle).abs() <= 1e-9 * (1.0 + oracle));
        }
    }
}
