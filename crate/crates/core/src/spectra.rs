//! Generalised Hurst exponents, mass exponents and the singularity
//! spectrum derived from a fluctuation surface.

use serde::{Deserialize, Serialize};

use crate::engine::FluctuationSurface;
use crate::error::{Error, Result};
use crate::regression::fit_line;
use crate::scalar::Scalar;
use crate::tsv;

/// Minimum number of grid scales inside a fit range.
pub const MIN_FIT_SCALES: usize = 5;
/// Series shorter than this use the short-series fit range.
pub const SHORT_SERIES_THRESHOLD: usize = 2000;

/// Inclusive scale window for the log-log regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRange {
    pub s_lo: usize,
    pub s_hi: usize,
}

impl FitRange {
    pub fn new(s_lo: usize, s_hi: usize) -> Result<Self> {
        if s_lo >= s_hi {
            return Err(Error::InvalidConfig(format!("fit range {s_lo}..{s_hi} is empty")));
        }
        Ok(Self { s_lo, s_hi })
    }

    /// 50..800 for long series, 10..60 below [`SHORT_SERIES_THRESHOLD`].
    pub fn default_for_length(n: usize) -> Self {
        if n < SHORT_SERIES_THRESHOLD {
            Self { s_lo: 10, s_hi: 60 }
        } else {
            Self { s_lo: 50, s_hi: 800 }
        }
    }

    pub fn contains(&self, s: usize) -> bool {
        (self.s_lo..=self.s_hi).contains(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstSpectrum<T> {
    pub q: Vec<T>,
    pub h: Vec<T>,
    pub h_err: Vec<T>,
    pub r2: Vec<T>,
    /// Scales that entered each regression (degenerate cells are skipped).
    pub n_scales: Vec<usize>,
    pub fit_range: FitRange,
}

impl<T: Scalar> HurstSpectrum<T> {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `h` at exactly `q`, if on the grid.
    pub fn at(&self, q: T) -> Option<T> {
        self.q.iter().position(|&x| x == q).map(|i| self.h[i])
    }

    pub fn to_tsv(&self) -> String {
        let header = ["q", "h", "h_err", "r2"].map(String::from);
        let rows = (0..self.len()).map(|i| {
            vec![tsv::short(self.q[i]), tsv::sci10(self.h[i]), tsv::sci10(self.h_err[i]), tsv::sci10(self.r2[i])]
        });
        tsv::render(&header, rows)
    }

    /// Reads `q h [h_err [r2]]` columns; missing error columns become 0.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Tsv("empty file".into()))?.split('\t').collect();
        if header.len() < 2 || header[0] != "q" || header[1] != "h" {
            return Err(Error::Tsv("expected columns `q h ...`".into()));
        }
        let mut out = Self {
            q: Vec::new(),
            h: Vec::new(),
            h_err: Vec::new(),
            r2: Vec::new(),
            n_scales: Vec::new(),
            fit_range: FitRange { s_lo: 0, s_hi: 0 },
        };
        for (i, line) in lines.enumerate() {
            let cells: Vec<f64> = line
                .split('\t')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Tsv(format!("row {}: {e}", i + 2))))
                .collect::<Result<_>>()?;
            if cells.len() < 2 {
                return Err(Error::Tsv(format!("row {}: need q and h", i + 2)));
            }
            out.q.push(T::of(cells[0]));
            out.h.push(T::of(cells[1]));
            out.h_err.push(T::of(cells.get(2).copied().unwrap_or(0.0)));
            out.r2.push(T::of(cells.get(3).copied().unwrap_or(1.0)));
            out.n_scales.push(0);
        }
        Ok(out)
    }
}

/// OLS of `ln F_q(s)` on `ln s` over the scales in `range`, one q at a time.
pub fn hurst_spectrum<T: Scalar>(surf: &FluctuationSurface<T>, range: FitRange) -> Result<HurstSpectrum<T>> {
    let in_range: Vec<usize> =
        surf.scale_grid().iter().enumerate().filter(|(_, s)| range.contains(**s)).map(|(i, _)| i).collect();
    if in_range.len() < MIN_FIT_SCALES {
        return Err(Error::InsufficientPoints { needed: MIN_FIT_SCALES, got: in_range.len() });
    }
    let nq = surf.q_grid().len();
    let mut spec = HurstSpectrum {
        q: surf.q_grid().to_vec(),
        h: Vec::with_capacity(nq),
        h_err: Vec::with_capacity(nq),
        r2: Vec::with_capacity(nq),
        n_scales: Vec::with_capacity(nq),
        fit_range: range,
    };
    for qi in 0..nq {
        let row = surf.row(qi);
        let (xs, ys): (Vec<T>, Vec<T>) = in_range
            .iter()
            .filter_map(|&si| row[si].map(|f| (T::from_usize_lossy(surf.scale_grid()[si]).ln(), f.ln())))
            .unzip();
        let fit = fit_line(&xs, &ys, MIN_FIT_SCALES)?;
        spec.h.push(fit.slope);
        spec.h_err.push(fit.slope_err);
        spec.r2.push(fit.r2);
        spec.n_scales.push(fit.n);
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSpectrum<T> {
    pub q: Vec<T>,
    pub tau: Vec<T>,
    pub tau_err: Vec<T>,
}

impl<T: Scalar> TauSpectrum<T> {
    pub fn to_tsv(&self) -> String {
        let header = ["q", "tau", "tau_err"].map(String::from);
        let rows = (0..self.q.len())
            .map(|i| vec![tsv::short(self.q[i]), tsv::sci10(self.tau[i]), tsv::sci10(self.tau_err[i])]);
        tsv::render(&header, rows)
    }
}

/// `tau(q) = q h(q) - 1`.
pub fn tau_from_h<T: Scalar>(h: &HurstSpectrum<T>) -> TauSpectrum<T> {
    TauSpectrum {
        q: h.q.clone(),
        tau: h.q.iter().zip(&h.h).map(|(&q, &hq)| q * hq - T::one()).collect(),
        tau_err: h.q.iter().zip(&h.h_err).map(|(&q, &e)| q.abs() * e).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint<T> {
    pub q: T,
    pub alpha: T,
    pub f: T,
}

/// Spectrum width at `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumWidth<T> {
    pub value: T,
    /// All Hölder exponents coincide.
    pub monofractal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularitySpectrum<T> {
    pub points: Vec<SpectrumPoint<T>>,
    pub width_at_zero: SpectrumWidth<T>,
}

impl<T: Scalar> SingularitySpectrum<T> {
    pub fn to_tsv(&self) -> String {
        let header = ["q", "alpha", "f"].map(String::from);
        let rows = self.points.iter().map(|p| vec![tsv::short(p.q), tsv::sci10(p.alpha), tsv::sci10(p.f)]);
        tsv::render(&header, rows)
    }
}

/// `alpha = d tau / d q` by central differences (one-sided at the ends)
/// and `f = q alpha - tau`.
pub fn singularity_spectrum<T: Scalar>(tau: &TauSpectrum<T>) -> Result<SingularitySpectrum<T>> {
    let q = &tau.q;
    let n = q.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    let step = (q[n - 1] - q[0]) / T::from_usize_lossy(n - 1);
    if !(step > T::zero()) {
        return Err(Error::NonUniformGrid);
    }
    let tol = step * T::of(1e-6);
    if q.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(Error::NonUniformGrid);
    }
    let t = &tau.tau;
    let points: Vec<SpectrumPoint<T>> = (0..n)
        .map(|i| {
            let alpha = match i {
                0 => (t[1] - t[0]) / (q[1] - q[0]),
                _ if i == n - 1 => (t[n - 1] - t[n - 2]) / (q[n - 1] - q[n - 2]),
                _ => (t[i + 1] - t[i - 1]) / (q[i + 1] - q[i - 1]),
            };
            SpectrumPoint { q: q[i], alpha, f: q[i] * alpha - t[i] }
        })
        .collect();
    let width_at_zero = width_of(&points);
    Ok(SingularitySpectrum { points, width_at_zero })
}

/// `alpha_max - alpha_min`, each end extended linearly to `f = 0` along
/// its branch when the computed points stop short of it.
pub fn spectrum_width<T: Scalar>(ss: &SingularitySpectrum<T>) -> Result<SpectrumWidth<T>> {
    if ss.points.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: ss.points.len() });
    }
    Ok(width_of(&ss.points))
}

fn width_of<T: Scalar>(points: &[SpectrumPoint<T>]) -> SpectrumWidth<T> {
    let finite = points.iter().all(|p| p.alpha.is_finite() && p.f.is_finite());
    if !finite {
        return SpectrumWidth { value: T::nan(), monofractal: false };
    }
    let by_alpha = |a: &&SpectrumPoint<T>, b: &&SpectrumPoint<T>| a.alpha.partial_cmp(&b.alpha).expect("finite");
    let lo = points.iter().enumerate().min_by(|a, b| by_alpha(&a.1, &b.1)).expect("non-empty").0;
    let hi = points.iter().enumerate().max_by(|a, b| by_alpha(&a.1, &b.1)).expect("non-empty").0;
    let spread = points[hi].alpha - points[lo].alpha;
    let scale = points[hi].alpha.abs().max(points[lo].alpha.abs()).max(T::one());
    if spread <= scale * T::of(1e-9) {
        return SpectrumWidth { value: T::zero(), monofractal: true };
    }
    let value = extend_to_zero(points, hi) - extend_to_zero(points, lo);
    SpectrumWidth { value: value.max(T::zero()), monofractal: false }
}

/// Alpha where the secant through point `i` and its inner neighbour (the
/// one closer to the middle of the q-grid) reaches `f = 0`. Falls back to
/// `alpha_i` when `f_i <= 0` or `f` does not decrease outward there.
fn extend_to_zero<T: Scalar>(points: &[SpectrumPoint<T>], i: usize) -> T {
    let p = points[i];
    if !(p.f > T::zero()) {
        return p.alpha;
    }
    let inner = if i == 0 {
        1
    } else if i == points.len() - 1 {
        i - 1
    } else if i < points.len() / 2 {
        i + 1
    } else {
        i - 1
    };
    let n = points[inner];
    let d_alpha = p.alpha - n.alpha;
    let d_f = p.f - n.f;
    if !(d_f < T::zero()) || d_alpha == T::zero() {
        return p.alpha;
    }
    p.alpha - p.f * d_alpha / d_f
}
