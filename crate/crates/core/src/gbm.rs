//! Generalised binomial multifractal (GBM) cascade: series generation,
//! closed-form spectra and least-squares fitting of `(a, b)` to an
//! empirical Hurst spectrum.
//!
//! With `m = (ln a + ln b) / 2` and `d = (ln a - ln b) / 2`,
//! `a^q + b^q = 2 e^{q m} cosh(q d)`, so
//!
//! ```text
//! tau(q) = -1 - q m / ln 2 - ln cosh(q d) / ln 2
//! h(q)   = -m / ln 2 - ln cosh(q d) / (q ln 2)
//! ```
//!
//! which is free of cancellation near `q = 0` and continuous there with
//! `h(0) = -(ln a + ln b) / (2 ln 2)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::nelder_mead;
use crate::scalar::Scalar;
use crate::spectra::HurstSpectrum;

pub const MAX_N_MAX: u32 = 24;
/// Coarse grid over `(0.3, 1.0)` in steps of 0.005: `k / 200`, `k = 61..=199`.
const GRID_K: std::ops::RangeInclusive<u32> = 61..=199;
const GRID_STEP: f64 = 0.005;
const SEARCH_LO: f64 = 0.3;
const SEARCH_HI: f64 = 1.0;
pub const REFINE_REL_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;
/// Fits with `rss / n` above this are rejected.
pub const REJECT_RSS_PER_POINT: f64 = 0.01;
/// `delta_alpha` below this is reported as monofractal.
pub const MONOFRACTAL_DELTA_ALPHA: f64 = 1e-4;

/// Cascade weights, stored with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmParams<T> {
    a: T,
    b: T,
}

impl<T: Scalar> GbmParams<T> {
    /// Swaps the arguments if needed so that `a <= b`.
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) || !(b > T::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("GBM parameters must be positive, got a={a}, b={b}")));
        }
        Ok(if a <= b { Self { a, b } } else { Self { a: b, b: a } })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    fn mean_log(&self) -> T {
        (self.a.ln() + self.b.ln()) / T::of(2.0)
    }

    fn half_log_ratio(&self) -> T {
        (self.a.ln() - self.b.ln()) / T::of(2.0)
    }
}

/// `x_k = a^{n(k-1)} b^{n_max - n(k-1)}`, `n(.)` the number of one bits,
/// for `k = 1..2^n_max`.
pub fn gbm_series<T: Scalar>(params: &GbmParams<T>, n_max: u32) -> Result<Vec<T>> {
    if n_max == 0 || n_max > MAX_N_MAX {
        return Err(Error::InvalidArgument(format!("n_max must be in 1..={MAX_N_MAX}, got {n_max}")));
    }
    let table: Vec<T> =
        (0..=n_max).map(|ones| params.a.powi(ones as i32) * params.b.powi((n_max - ones) as i32)).collect();
    Ok((0u64..1 << n_max).map(|k| table[k.count_ones() as usize]).collect())
}

fn ln_cosh<T: Scalar>(x: T) -> T {
    let ax = x.abs();
    ax + (T::of(-2.0) * ax).exp().ln_1p() - T::LN_2()
}

/// Generalised Hurst exponent of the cascade; continuous at `q = 0`.
pub fn gbm_h<T: Scalar>(q: T, params: &GbmParams<T>) -> T {
    let base = -params.mean_log() / T::LN_2();
    if q == T::zero() {
        return base;
    }
    base - ln_cosh(q * params.half_log_ratio()) / (q * T::LN_2())
}

/// Mass exponent `-ln(a^q + b^q) / ln 2`.
pub fn gbm_tau<T: Scalar>(q: T, params: &GbmParams<T>) -> T {
    -T::one() - q * params.mean_log() / T::LN_2() - ln_cosh(q * params.half_log_ratio()) / T::LN_2()
}

/// Analytic Hölder exponent `d tau / d q`.
pub fn gbm_alpha<T: Scalar>(q: T, params: &GbmParams<T>) -> T {
    let d = params.half_log_ratio();
    -(params.mean_log() + d * (q * d).tanh()) / T::LN_2()
}

/// Analytic `f(alpha(q)) = q alpha(q) - tau(q)`.
pub fn gbm_f<T: Scalar>(q: T, params: &GbmParams<T>) -> T {
    q * gbm_alpha(q, params) - gbm_tau(q, params)
}

/// Spectrum width `|ln a - ln b| / ln 2`.
pub fn delta_alpha<T: Scalar>(params: &GbmParams<T>) -> T {
    (params.a.ln() - params.b.ln()).abs() / T::LN_2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct FitOptions {
    /// Weight residuals by `1 / h_err^2`.
    pub weighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbmFitResult<T> {
    pub params: GbmParams<T>,
    pub a_err: T,
    pub b_err: T,
    pub delta_alpha: T,
    pub delta_alpha_err: T,
    /// Unweighted residual sum of squares over the q-grid.
    pub residual_sum_squares: T,
    pub n_points: usize,
    /// `rss / n_points <= 0.01`.
    pub accepted: bool,
    pub monofractal: bool,
    /// The optimum lies within one grid step of the search boundary.
    pub at_boundary: bool,
    pub weighted: bool,
    pub iterations: usize,
}

fn objective<T: Scalar>(q: &[T], h: &[T], w: &[T], a: T, b: T) -> T {
    if !(a > T::zero()) || !(b > T::zero()) {
        return T::infinity();
    }
    let p = GbmParams { a, b };
    q.iter().zip(h).zip(w).fold(T::zero(), |acc, ((&qi, &hi), &wi)| {
        let r = hi - gbm_h(qi, &p);
        acc + wi * r * r
    })
}

/// Least-squares fit of `gbm_h` to `h`: coarse grid, then Nelder-Mead.
/// Deterministic: fixed grid, fixed refinement schedule, ties resolved
/// towards the lowest `a` and then the lowest `b`.
pub fn fit_gbm<T: Scalar>(h: &HurstSpectrum<T>, options: FitOptions) -> Result<GbmFitResult<T>> {
    let n = h.q.len();
    if n < 8 {
        return Err(Error::InsufficientPoints { needed: 8, got: n });
    }
    if !h.q.iter().any(|&q| q < T::zero()) || !h.q.iter().any(|&q| q > T::zero()) {
        return Err(Error::InvalidArgument("GBM fit needs both negative and positive q".into()));
    }
    if h.h.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("Hurst spectrum has non-finite values".into()));
    }
    let weights: Vec<T> = if options.weighted {
        if h.h_err.iter().any(|&e| !(e > T::zero()) || !e.is_finite()) {
            return Err(Error::InvalidArgument("weighted fit needs positive finite h_err".into()));
        }
        h.h_err.iter().map(|&e| T::one() / (e * e)).collect()
    } else {
        vec![T::one(); n]
    };
    let (q, hv, w) = (&h.q, &h.h, &weights);

    let grid: Vec<T> = GRID_K.map(|k| T::of(k as f64 / 200.0)).collect();
    let row_best: Vec<(T, usize, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (T::infinity(), i, i);
            for j in i..grid.len() {
                let v = objective(q, hv, w, grid[i], grid[j]);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .collect();
    let (mut best_value, bi, bj) = row_best[0];
    let (mut best_i, mut best_j) = (bi, bj);
    for &(v, i, j) in &row_best[1..] {
        if v < best_value {
            (best_value, best_i, best_j) = (v, i, j);
        }
    }
    if !best_value.is_finite() {
        return Err(Error::InvalidArgument("GBM objective is not finite anywhere on the grid".into()));
    }

    let f = |x: &[T]| objective(q, hv, w, x[0], x[1]);
    let mut point = vec![grid[best_i], grid[best_j]];
    let mut iterations = 0;
    // Restart from the incumbent until a restart no longer improves it.
    for _ in 0..4 {
        let budget = MAX_ITERATIONS - iterations;
        let m = nelder_mead(f, &point, T::of(GRID_STEP), T::of(REFINE_REL_TOL), budget);
        iterations += m.iterations;
        if !m.converged {
            return Err(Error::NoConvergence(MAX_ITERATIONS));
        }
        let improved = m.value < best_value;
        if improved {
            best_value = m.value;
            point = m.point;
        }
        if !improved || iterations >= MAX_ITERATIONS {
            break;
        }
    }

    let params = GbmParams::new(point[0], point[1])?;
    let (a, b) = (params.a, params.b);
    let unweighted = objective(q, hv, &vec![T::one(); n], a, b);
    let (a_err, b_err) = parameter_errors(f, a, b, best_value, n, options.weighted);
    let da = delta_alpha(&params);
    let da_err = ((a_err / a).powi(2) + (b_err / b).powi(2)).sqrt() / T::LN_2();
    let step = T::of(GRID_STEP);
    let at_boundary = [a, b].iter().any(|&v| v <= T::of(SEARCH_LO) + step || v >= T::of(SEARCH_HI) - step);
    if at_boundary {
        log::warn!("GBM fit at the search boundary: a={a}, b={b}");
    }
    Ok(GbmFitResult {
        params,
        a_err,
        b_err,
        delta_alpha: da,
        delta_alpha_err: da_err,
        residual_sum_squares: unweighted,
        n_points: n,
        accepted: unweighted / T::from_usize_lossy(n) <= T::of(REJECT_RSS_PER_POINT),
        monofractal: da < T::of(MONOFRACTAL_DELTA_ALPHA),
        at_boundary,
        weighted: options.weighted,
        iterations,
    })
}

/// Standard errors from the curvature of the objective at the optimum:
/// `cov = 2 s^2 H^{-1}`, `s^2 = S / (n - 2)` for an unweighted fit and 1
/// for a weighted one.
fn parameter_errors<T: Scalar>(f: impl Fn(&[T]) -> T, a: T, b: T, value: T, n: usize, weighted: bool) -> (T, T) {
    let scale = if weighted { T::one() } else { value / T::from_usize_lossy(n.saturating_sub(2).max(1)) };
    if !(scale > T::zero()) {
        return (T::zero(), T::zero());
    }
    let (ha, hb) = (a * T::of(1e-4), b * T::of(1e-4));
    let e = |da: T, db: T| f(&[a + da, b + db]);
    let two = T::of(2.0);
    let f0 = e(T::zero(), T::zero());
    let faa = (e(ha, T::zero()) - two * f0 + e(-ha, T::zero())) / (ha * ha);
    let fbb = (e(T::zero(), hb) - two * f0 + e(T::zero(), -hb)) / (hb * hb);
    let fab = (e(ha, hb) - e(ha, -hb) - e(-ha, hb) + e(-ha, -hb)) / (T::of(4.0) * ha * hb);
    let det = faa * fbb - fab * fab;
    let (var_a, var_b) = if det > T::zero() && faa > T::zero() {
        (two * scale * fbb / det, two * scale * faa / det)
    } else {
        log::warn!("GBM objective is not locally convex at a={a}, b={b}; using diagonal curvature");
        let inv = |c: T| if c > T::zero() { two * scale / c } else { T::zero() };
        (inv(faa), inv(fbb))
    };
    (var_a.max(T::zero()).sqrt(), var_b.max(T::zero()).sqrt())
}
