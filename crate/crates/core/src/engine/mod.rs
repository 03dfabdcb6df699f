//! Multifractal detrended fluctuation analysis: profile, two-ended
//! segmentation, polynomial detrending and the q-th order fluctuation
//! function over a `(q, s)` grid.

mod detrend;
mod surface;

pub use detrend::{detrend_segment, PolyBasis, PolyFit};
pub use surface::{fluctuation_surface, DegenerateCell, FluctuationSurface};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};
use crate::series::ReturnSeries;

/// Smallest scale of the default grid.
pub const DEFAULT_S_MIN: usize = 6;
/// Number of log-spaced scales requested by the default grid.
pub const DEFAULT_N_SCALES: usize = 30;
pub const DEFAULT_ORDER: usize = 2;

/// Cumulative sum of the mean-subtracted series.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSeries<T> {
    values: Vec<T>,
}

impl<T: Scalar> ProfileSeries<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_len(&self) -> usize {
        self.values.len()
    }
}

pub fn compute_profile<T: Scalar>(x: &ReturnSeries<T>) -> Result<ProfileSeries<T>> {
    profile_of(x.values())
}

pub(crate) fn profile_of<T: Scalar>(x: &[T]) -> Result<ProfileSeries<T>> {
    if x.len() < 4 {
        return Err(Error::TooShort { needed: 4, got: x.len() });
    }
    let m = mean(x);
    let mut acc = T::zero();
    let values = x
        .iter()
        .map(|&v| {
            acc = acc + (v - m);
            acc
        })
        .collect();
    Ok(ProfileSeries { values })
}

/// Grid and detrending settings for one MF-DFA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfdfaConfig<T> {
    pub detrend_order: usize,
    pub q_grid: Vec<T>,
    pub scale_grid: Vec<usize>,
    pub seed: u64,
}

impl<T: Scalar> MfdfaConfig<T> {
    /// MF-DFA2 on q = -10..10 step 0.5 with the default scale grid for `n`.
    pub fn for_length(n: usize) -> Result<Self> {
        Ok(Self {
            detrend_order: DEFAULT_ORDER,
            q_grid: default_q_grid(),
            scale_grid: default_scale_grid(n, DEFAULT_ORDER, DEFAULT_S_MIN, n / 5, DEFAULT_N_SCALES)?,
            seed: 0,
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.detrend_order < 1 {
            return bad("detrend order must be positive".into());
        }
        if self.scale_grid.is_empty() {
            return bad("empty scale grid".into());
        }
        if self.scale_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("scale grid must be strictly increasing".into());
        }
        let lo = self.detrend_order + 2;
        let hi = n / 4;
        for &s in &self.scale_grid {
            if s < lo {
                return bad(format!("scale {s} is below order + 2 = {lo}"));
            }
            if s > hi {
                return bad(format!("scale {s} exceeds N/4 = {hi} for N = {n}"));
            }
        }
        if self.q_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("q grid must be strictly increasing".into());
        }
        if self.q_grid.iter().any(|q| !q.is_finite()) {
            return bad("q grid has non-finite values".into());
        }
        for required in [0.0, 2.0] {
            if !self.q_grid.iter().any(|&q| q == T::of(required)) {
                return bad(format!("q grid must contain {required}"));
            }
        }
        Ok(())
    }
}

/// q = -10, -9.5, ..., 10.
pub fn default_q_grid<T: Scalar>() -> Vec<T> {
    (-20..=20).map(|k| T::of(k as f64 * 0.5)).collect()
}

/// Uniform grid from `min` to `max` inclusive. When both ends are integer
/// multiples of `step` the points are exact multiples, so 0 and 2 land on
/// the grid exactly.
pub fn uniform_q_grid<T: Scalar>(min: f64, max: f64, step: f64) -> Result<Vec<T>> {
    if !(step > 0.0) || !(max > min) || !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidConfig(format!("bad q range {min}..{max} step {step}")));
    }
    let kmin = min / step;
    let kmax = max / step;
    let integral = |k: f64| (k - k.round()).abs() < 1e-9;
    if integral(kmin) && integral(kmax) {
        Ok((kmin.round() as i64..=kmax.round() as i64).map(|k| T::of(k as f64 * step)).collect())
    } else {
        let count = ((max - min) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| T::of(min + i as f64 * step)).collect())
    }
}

/// About `count` integer scales log-spaced in `[s_min, s_max]`, deduplicated.
/// `s_min` is raised to `order + 2` and `s_max` capped at `n / 4`.
pub fn default_scale_grid(n: usize, order: usize, s_min: usize, s_max: usize, count: usize) -> Result<Vec<usize>> {
    let lo = s_min.max(order + 2);
    let hi = s_max.min(n / 4);
    if hi < lo {
        return Err(Error::TooShort { needed: 5 * lo, got: n });
    }
    if count < 2 || hi == lo {
        return Ok(vec![lo]);
    }
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<usize> = (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|s| s.clamp(lo, hi))
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Residual variances `F^2(p, s)` of the `2 N_s` segments: `N_s` taken from
/// the start of the profile, then `N_s` taken from its end.
pub fn segment_variances<T: Scalar>(profile: &ProfileSeries<T>, s: usize, order: usize) -> Result<Vec<T>> {
    let basis = PolyBasis::new(s, order)?;
    segment_variances_with(profile.values(), &basis)
}

pub(crate) fn segment_variances_with<T: Scalar>(y: &[T], basis: &PolyBasis<T>) -> Result<Vec<T>> {
    let n = y.len();
    let s = basis.len();
    if n < s {
        return Err(Error::TooShort { needed: s, got: n });
    }
    Ok(segment_ranges(n, s).into_iter().map(|r| basis.residual_variance(&y[r])).collect())
}

/// Zero-based index ranges of the `2 N_s` segments of length `s` in a
/// profile of length `n`, in the order used by [`segment_variances`].
pub fn segment_ranges(n: usize, s: usize) -> Vec<std::ops::Range<usize>> {
    if s == 0 {
        return Vec::new();
    }
    let ns = n / s;
    let forward = (0..ns).map(|p| p * s..(p + 1) * s);
    let backward = (1..=ns).map(|k| n - k * s..n - (k - 1) * s);
    forward.chain(backward).collect()
}

/// Generalised mean of order `q` of the segment standard deviations;
/// geometric form at `q = 0`.
///
/// Evaluated in log space (log-sum-exp), so `|q|` up to the tens does not
/// overflow. A zero variance is fatal for `q <= 0`.
pub fn fluctuation_at<T: Scalar>(variances: &[T], q: T) -> Result<T> {
    if variances.is_empty() {
        return Err(Error::InvalidArgument("no segment variances".into()));
    }
    let degenerate = || Error::DegenerateSegment { q: q.as_f64(), s: None };
    let n = T::from_usize_lossy(variances.len());
    let two = T::of(2.0);
    if q == T::zero() {
        if variances.iter().any(|&v| !(v > T::zero())) {
            return Err(degenerate());
        }
        let sum_ln: T = variances.iter().map(|v| v.ln()).sum();
        return Ok((sum_ln / (two * n)).exp());
    }
    if q < T::zero() && variances.iter().any(|&v| !(v > T::zero())) {
        return Err(degenerate());
    }
    let half_q = q / two;
    let exps: Vec<T> = variances.iter().map(|&v| half_q * v.ln()).collect();
    let peak = exps.iter().copied().fold(T::neg_infinity(), T::max);
    if !peak.is_finite() {
        return Err(degenerate());
    }
    let sum: T = exps.iter().map(|&e| (e - peak).exp()).sum();
    let f = ((peak + sum.ln() - n.ln()) / q).exp();
    if !(f > T::zero()) || !f.is_finite() {
        return Err(degenerate());
    }
    Ok(f)
}
