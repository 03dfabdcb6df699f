//! Synthetic test series: white noise, symmetrised Pareto noise and
//! Fourier-filtered correlated Gaussian noise. All are reproducible from a
//! seed. The binomial cascade lives in [`crate::gbm`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::scalar::{mean, population_variance, Scalar};
use crate::surrogate::RngStream;

/// I.i.d. standard normal values.
pub fn white_noise<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    let mut rng = RngStream::new(seed);
    (0..n).map(|_| T::of(rng.gaussian())).collect()
}

/// `+/- U^{-1/alpha}` with a fair random sign, so `P(|x| > v) = v^{-alpha}`
/// for `v >= 1`.
pub fn symmetric_pareto<T: Scalar>(n: usize, tail_index: f64, seed: u64) -> Result<Vec<T>> {
    if !(tail_index > 0.0) || !tail_index.is_finite() {
        return Err(Error::InvalidArgument(format!("tail index must be positive, got {tail_index}")));
    }
    let mut rng = RngStream::new(seed);
    Ok((0..n)
        .map(|_| {
            let u = 1.0 - rng.uniform();
            let magnitude = u.powf(-1.0 / tail_index);
            T::of(if rng.uniform() < 0.5 { -magnitude } else { magnitude })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Correlation {
    /// `C(s) = exp(-s / crossover)`, the AR(1) spectrum.
    Exponential { crossover: f64 },
    /// `S(f) ~ f^{-beta}`, so `C(s) ~ s^{beta - 1}` and `H = (1 + beta) / 2`
    /// for `0 < beta < 1`.
    PowerLaw { beta: f64 },
}

impl Correlation {
    fn power(&self, f: f64) -> f64 {
        match *self {
            Correlation::Exponential { crossover } => {
                let rho = (-1.0 / crossover).exp();
                (1.0 - rho * rho) / (1.0 - 2.0 * rho * (2.0 * std::f64::consts::PI * f).cos() + rho * rho)
            }
            Correlation::PowerLaw { beta } => {
                if f == 0.0 {
                    0.0
                } else {
                    f.powf(-beta)
                }
            }
        }
    }
}

/// Gaussian white noise shaped in the frequency domain by `sqrt(S(f))`,
/// then standardised to zero mean and unit variance.
pub fn correlated_noise<T: Scalar>(n: usize, correlation: Correlation, seed: u64) -> Result<Vec<T>> {
    match correlation {
        Correlation::Exponential { crossover } if !(crossover > 0.0) => {
            return Err(Error::InvalidArgument(format!("crossover must be positive, got {crossover}")))
        }
        Correlation::PowerLaw { beta } if !(0.0..2.0).contains(&beta) => {
            return Err(Error::InvalidArgument(format!("beta must be in [0, 2), got {beta}")))
        }
        _ => {}
    }
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let w: Vec<f64> = white_noise(n, seed);
    let mut spec = fourier::forward(&w);
    for (k, c) in spec.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 / n as f64;
        *c *= correlation.power(f).sqrt();
    }
    let y = fourier::inverse_real(&spec);
    let (m, sd) = (mean(&y), population_variance(&y).sqrt());
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(y.into_iter().map(|v| T::of((v - m) / sd)).collect())
}
