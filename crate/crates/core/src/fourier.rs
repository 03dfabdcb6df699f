//! Discrete Fourier transform of real data for arbitrary lengths.

pub use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Scalar;

/// Unnormalised forward DFT `X_k = sum_j x_j e^{-2 pi i jk/N}`.
pub fn forward<T: Scalar>(x: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Inverse DFT including the `1/N` factor.
pub fn inverse<T: Scalar>(spectrum: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = spectrum.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let n = T::from_usize_lossy(buf.len());
    buf.iter_mut().for_each(|c| *c = *c / n);
    buf
}

/// Real part of the inverse transform; the caller guarantees conjugate
/// symmetry.
pub fn inverse_real<T: Scalar>(spectrum: &[Complex<T>]) -> Vec<T> {
    inverse(spectrum).into_iter().map(|c| c.re).collect()
}
