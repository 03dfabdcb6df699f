//! Autocorrelation and power-law tail estimation for normalised returns.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::regression::fit_line;
use crate::scalar::{mean, population_variance, Scalar};
use crate::series::ReturnSeries;

pub const NORMALIZATION_TOL: f64 = 1e-6;
pub const CCDF_MIN_LEN: usize = 10;
pub const TAIL_MIN_POINTS: usize = 20;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.05;
/// Tail fits with `r2` below this are flagged as not power-law.
pub const POWER_LAW_MIN_R2: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfResult<T> {
    pub lags: Vec<usize>,
    pub c: Vec<T>,
}

impl<T: Scalar> AcfResult<T> {
    /// Two columns `s` and `C`.
    pub fn to_tsv(&self) -> String {
        let rows = self.lags.iter().zip(&self.c).map(|(&s, &c)| vec![s.to_string(), crate::tsv::sci10(c)]);
        crate::tsv::render(&["s".to_string(), "C".to_string()], rows)
    }
}

fn check_normalized<T: Scalar>(x: &[T]) -> Result<()> {
    let m = mean(x).as_f64();
    let v = population_variance(x).as_f64();
    if !(m.abs() <= NORMALIZATION_TOL) || !((v - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { mean: m, variance: v });
    }
    Ok(())
}

/// `<x_i x_{i+s}> = 1/(N-s) sum_{i=1}^{N-s} x_i x_{i+s}`, any `s < N`.
pub fn lagged_product_mean<T: Scalar>(x: &[T], s: usize) -> T {
    let n = x.len() - s;
    x[..n].iter().zip(&x[s..]).map(|(&a, &b)| a * b).sum::<T>() / T::from_usize_lossy(n)
}

/// `C(s)` for `s = 1..=max_lag` of a zero-mean, unit-variance series.
pub fn autocorrelation<T: Scalar>(x: &ReturnSeries<T>, max_lag: usize) -> Result<AcfResult<T>> {
    let v = x.values();
    if max_lag == 0 || max_lag > v.len() / 4 {
        return Err(Error::InvalidArgument(format!(
            "max_lag must be in 1..={} for {} values, got {max_lag}",
            v.len() / 4,
            v.len()
        )));
    }
    check_normalized(v)?;
    let lags: Vec<usize> = (1..=max_lag).collect();
    let c = lags.iter().map(|&s| lagged_product_mean(v, s)).collect();
    Ok(AcfResult { lags, c })
}

/// Fit of a decaying correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit<T> {
    /// Power law: `gamma` in `C ~ s^{-gamma}`. Exponential: `s_x` in
    /// `C ~ exp(-s / s_x)`.
    pub exponent: T,
    pub exponent_err: T,
    pub r2: T,
    pub n_points: usize,
}

fn positive_points<T: Scalar>(acf: &AcfResult<T>) -> (Vec<T>, Vec<T>) {
    acf.lags.iter().zip(&acf.c).filter(|(_, &c)| c > T::zero()).map(|(&s, &c)| (T::from_usize_lossy(s), c.ln())).unzip()
}

/// OLS of `ln C` on `ln s` over lags with `C > 0`; `gamma = -slope`, so a
/// decaying correlation has positive `gamma` and `H = 1 - gamma / 2`.
pub fn power_law_decay<T: Scalar>(acf: &AcfResult<T>) -> Result<DecayFit<T>> {
    let (s, lc) = positive_points(acf);
    let ls: Vec<T> = s.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&ls, &lc, 3)?;
    Ok(DecayFit { exponent: -fit.slope, exponent_err: fit.slope_err, r2: fit.r2, n_points: fit.n })
}

/// OLS of `ln C` on `s` over lags with `C > 0`; `s_x = -1 / slope`.
pub fn exponential_decay<T: Scalar>(acf: &AcfResult<T>) -> Result<DecayFit<T>> {
    let (s, lc) = positive_points(acf);
    let fit = fit_line(&s, &lc, 3)?;
    let sx = -T::one() / fit.slope;
    Ok(DecayFit { exponent: sx, exponent_err: fit.slope_err * sx * sx, r2: fit.r2, n_points: fit.n })
}

/// Hurst exponent implied by a correlation exponent.
pub fn hurst_from_gamma<T: Scalar>(gamma: T) -> T {
    T::one() - gamma / T::of(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcdfPoint<T> {
    pub value: T,
    pub probability: T,
}

/// Rank construction on magnitudes: sorted descending, point `k` is
/// `(v_(k), k / N)`.
pub fn ccdf_of_magnitudes<T: Scalar>(values: &[T]) -> Vec<CcdfPoint<T>> {
    let mut v: Vec<T> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::from_usize_lossy(v.len());
    v.into_iter()
        .enumerate()
        .map(|(k, value)| CcdfPoint { value, probability: T::from_usize_lossy(k + 1) / n })
        .collect()
}

/// CCDF of the absolute values of a normalised series.
pub fn empirical_ccdf<T: Scalar>(x: &ReturnSeries<T>) -> Result<Vec<CcdfPoint<T>>> {
    if x.len() < CCDF_MIN_LEN {
        return Err(Error::TooShort { needed: CCDF_MIN_LEN, got: x.len() });
    }
    Ok(ccdf_of_magnitudes(x.values()))
}

pub fn ccdf_to_tsv<T: Scalar>(points: &[CcdfPoint<T>]) -> String {
    let rows = points.iter().map(|p| vec![crate::tsv::sci10(p.value), crate::tsv::sci10(p.probability)]);
    crate::tsv::render(&["value".to_string(), "P".to_string()], rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    CcdfOls,
    Hill,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillEstimate<T> {
    pub zeta: T,
    pub zeta_err: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit<T> {
    pub zeta: T,
    pub zeta_err: T,
    pub r2: T,
    pub method: TailMethod,
    pub tail_fraction: T,
    pub n_points: usize,
    /// `r2 >= 0.98`.
    pub power_law: bool,
    pub hill: HillEstimate<T>,
}

/// Power-law regression `ln P = c - zeta ln v` over the largest
/// `tail_fraction` of the points, with a Hill estimate on the same points.
pub fn tail_exponent<T: Scalar>(ccdf: &[CcdfPoint<T>], tail_fraction: T) -> Result<TailFit<T>> {
    if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
        return Err(Error::InvalidArgument(format!("tail_fraction must be in (0, 1], got {tail_fraction}")));
    }
    let k = (tail_fraction * T::from_usize_lossy(ccdf.len())).ceil().to_usize().unwrap_or(0).min(ccdf.len());
    if k < TAIL_MIN_POINTS {
        return Err(Error::InsufficientPoints { needed: TAIL_MIN_POINTS, got: k });
    }
    let tail = &ccdf[..k];
    if let Some(p) = tail.iter().find(|p| !(p.value > T::zero())) {
        return Err(Error::NonPositiveTail(p.value.as_f64()));
    }
    let lv: Vec<T> = tail.iter().map(|p| p.value.ln()).collect();
    let lp: Vec<T> = tail.iter().map(|p| p.probability.ln()).collect();
    let fit = fit_line(&lv, &lp, TAIL_MIN_POINTS)?;

    let threshold = lv[k - 1];
    let excess: T = lv[..k - 1].iter().map(|&l| l - threshold).sum();
    let m = T::from_usize_lossy(k - 1);
    let hill_zeta = if excess > T::zero() { m / excess } else { T::infinity() };
    let hill = HillEstimate { zeta: hill_zeta, zeta_err: hill_zeta / m.sqrt() };

    Ok(TailFit {
        zeta: -fit.slope,
        zeta_err: fit.slope_err,
        r2: fit.r2,
        method: TailMethod::CcdfOls,
        tail_fraction,
        n_points: k,
        power_law: fit.r2 >= T::of(POWER_LAW_MIN_R2),
        hill,
    })
}
