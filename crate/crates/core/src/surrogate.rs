//! Shuffled and AAFT surrogates and ensemble-averaged Hurst spectra.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{fluctuation_surface, MfdfaConfig};
use crate::error::{Error, Result};
use crate::fourier::{self, Complex};
use crate::scalar::Scalar;
use crate::series::ReturnSeries;
use crate::spectra::{hurst_spectrum, FitRange, HurstSpectrum};

pub const DEFAULT_REALIZATIONS: usize = 10;
pub const AAFT_MIN_LEN: usize = 8;

/// Seeded random stream. ChaCha20 with the `rand_core` seed expansion of
/// a 64-bit seed, so a given seed gives the same stream on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform on `0..=upper`.
    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..=upper)
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateMethod {
    Shuffle,
    Aaft,
}

impl fmt::Display for SurrogateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurrogateMethod::Shuffle => "shuffle",
            SurrogateMethod::Aaft => "aaft",
        })
    }
}

impl FromStr for SurrogateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shuffle" => Ok(Self::Shuffle),
            "aaft" => Ok(Self::Aaft),
            other => Err(Error::InvalidArgument(format!("unknown surrogate method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_realizations: usize,
    pub method: SurrogateMethod,
    pub base_seed: u64,
}

impl EnsembleSpec {
    pub fn new(n_realizations: usize, method: SurrogateMethod, base_seed: u64) -> Result<Self> {
        if n_realizations == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one realization".into()));
        }
        Ok(Self { n_realizations, method, base_seed })
    }

    /// Seed of realization `i`.
    pub fn seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_realizations).map(|i| self.seed(i)).collect()
    }
}

/// Fisher-Yates permutation of the values; timestamps stay in place.
pub fn shuffle<T: Scalar>(x: &ReturnSeries<T>, rng: &mut RngStream) -> Result<ReturnSeries<T>> {
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let mut v = x.values().to_vec();
    for i in (1..v.len()).rev() {
        let j = rng.index(i);
        v.swap(i, j);
    }
    Ok(x.with_values(v))
}

/// Indices that sort `v` ascending; equal values keep their index order.
fn argsort<T: Scalar>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// Places `sorted[k]` where `template` has its k-th smallest value.
fn rank_order<T: Scalar>(template: &[T], sorted: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); template.len()];
    for (k, i) in argsort(template).into_iter().enumerate() {
        out[i] = sorted[k];
    }
    out
}

/// Same amplitudes, uniformly random phases, real inverse. The DC term and
/// for even lengths the Nyquist term are left untouched.
pub fn phase_randomize<T: Scalar>(y: &[T], rng: &mut RngStream) -> Vec<T> {
    let n = y.len();
    let mut spec = fourier::forward(y);
    for k in 1..n.div_ceil(2) {
        let phi = T::of(2.0 * std::f64::consts::PI * rng.uniform());
        let c = Complex::from_polar(spec[k].norm(), phi);
        spec[k] = c;
        spec[n - k] = c.conj();
    }
    fourier::inverse_real(&spec)
}

/// Amplitude-adjusted Fourier transform surrogate (one iteration).
///
/// Gaussian draws are rank-ordered onto the data, phase randomised, and
/// the sorted data are finally rank-ordered onto the result, so the output
/// is an exact rearrangement of the input. Ties are broken by index.
pub fn aaft<T: Scalar>(x: &ReturnSeries<T>, rng: &mut RngStream) -> Result<ReturnSeries<T>> {
    let n = x.len();
    if n < AAFT_MIN_LEN {
        return Err(Error::TooShort { needed: AAFT_MIN_LEN, got: n });
    }
    let values = x.values();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let mut gauss: Vec<T> = (0..n).map(|_| T::of(rng.gaussian())).collect();
    gauss.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let gaussianized = rank_order(values, &gauss);
    let randomized = phase_randomize(&gaussianized, rng);
    Ok(x.with_values(rank_order(&randomized, &sorted)))
}

/// One realization of `method` with its own stream seeded by `seed`.
pub fn realize<T: Scalar>(x: &ReturnSeries<T>, method: SurrogateMethod, seed: u64) -> Result<ReturnSeries<T>> {
    let mut rng = RngStream::new(seed);
    match method {
        SurrogateMethod::Shuffle => shuffle(x, &mut rng),
        SurrogateMethod::Aaft => aaft(x, &mut rng),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedRealization {
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleHurst<T> {
    /// Per-q mean; `h_err` is the standard deviation across realizations
    /// over `sqrt(n)`.
    pub spectrum: HurstSpectrum<T>,
    /// Seeds of the realizations that entered the mean.
    pub seeds: Vec<u64>,
    pub excluded: Vec<ExcludedRealization>,
}

/// MF-DFA on `n_realizations` surrogates seeded `base_seed + i`, averaged
/// per q. Failing realizations are dropped and listed.
pub fn ensemble_hurst<T: Scalar>(
    x: &ReturnSeries<T>,
    spec: &EnsembleSpec,
    cfg: &MfdfaConfig<T>,
    range: FitRange,
) -> Result<EnsembleHurst<T>> {
    if spec.n_realizations == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one realization".into()));
    }
    cfg.validate(x.len())?;
    let runs: Vec<(u64, Result<HurstSpectrum<T>>)> = spec
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let run = realize(x, spec.method, seed)
                .and_then(|s| fluctuation_surface(&s, cfg))
                .and_then(|surf| hurst_spectrum(&surf, range));
            (seed, run)
        })
        .collect();

    let mut seeds = Vec::new();
    let mut excluded = Vec::new();
    let mut ok = Vec::new();
    for (seed, run) in runs {
        match run {
            Ok(h) => {
                seeds.push(seed);
                ok.push(h);
            }
            Err(e) => {
                log::warn!("{} realization with seed {seed} excluded: {e}", spec.method);
                excluded.push(ExcludedRealization { seed, reason: e.to_string() });
            }
        }
    }
    let first = match ok.first() {
        Some(h) => h.clone(),
        None => {
            return Err(Error::InvalidArgument(format!(
                "all {} {} realizations failed",
                spec.n_realizations, spec.method
            )))
        }
    };
    if ok.len() == 1 {
        return Ok(EnsembleHurst { spectrum: first, seeds, excluded });
    }

    let n = T::from_usize_lossy(ok.len());
    let nq = first.q.len();
    let mut mean =
        HurstSpectrum { h: vec![T::zero(); nq], h_err: vec![T::zero(); nq], r2: vec![T::zero(); nq], ..first };
    for qi in 0..nq {
        let m = ok.iter().map(|h| h.h[qi]).sum::<T>() / n;
        let var = ok.iter().map(|h| (h.h[qi] - m).powi(2)).sum::<T>() / (n - T::one());
        mean.h[qi] = m;
        mean.h_err[qi] = (var / n).sqrt();
        mean.r2[qi] = ok.iter().map(|h| h.r2[qi]).sum::<T>() / n;
        mean.n_scales[qi] = ok.iter().map(|h| h.n_scales[qi]).min().unwrap_or(0);
    }
    Ok(EnsembleHurst { spectrum: mean, seeds, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> ReturnSeries<f64> {
        ReturnSeries::undated("t", v).unwrap()
    }

    fn sorted(v: &[f64]) -> Vec<u64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn rng_is_reproducible() {
        let a: Vec<u64> = (0..4).scan(RngStream::new(7), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).scan(RngStream::new(7), |r, _| Some(r.next_u64())).collect();
        let c: Vec<u64> = (0..4).scan(RngStream::new(8), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut r = RngStream::new(1);
        assert!((0..1000).map(|_| r.uniform()).all(|u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn shuffle_seed_42_is_pinned() {
        let x = series(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = shuffle(&x, &mut RngStream::new(42)).unwrap();
        let b = shuffle(&x, &mut RngStream::new(42)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(sorted(a.values()), sorted(x.values()));
        assert_eq!(a.values(), SEED_42_PERMUTATION);
    }

    const SEED_42_PERMUTATION: &[f64] = &[4.0, 1.0, 2.0, 3.0, 5.0];

    #[test]
    fn shuffle_needs_two_values() {
        assert!(shuffle(&series(vec![1.0]), &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn shuffle_is_roughly_uniform() {
        let x = series(vec![0.0, 1.0, 2.0]);
        let mut counts = std::collections::BTreeMap::new();
        let mut rng = RngStream::new(3);
        for _ in 0..6000 {
            let p: Vec<i64> = shuffle(&x, &mut rng).unwrap().values().iter().map(|&v| v as i64).collect();
            *counts.entry(p).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| (850..1150).contains(&c)), "{counts:?}");
    }

    #[test]
    fn aaft_preserves_multiset_with_ties() {
        let v: Vec<f64> = (0..101).map(|i| ((i * 37) % 11) as f64 * 0.5 - 2.0).collect();
        let x = series(v);
        let s = aaft(&x, &mut RngStream::new(9)).unwrap();
        assert_eq!(sorted(s.values()), sorted(x.values()));
        let again = aaft(&x, &mut RngStream::new(9)).unwrap();
        assert_eq!(s.values(), again.values());
        assert!(aaft(&series(vec![1.0; 7]), &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn phase_randomization_keeps_amplitudes() {
        for n in [64, 65] {
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin() + 0.1 * i as f64).collect();
            let z = phase_randomize(&y, &mut RngStream::new(5));
            let (fy, fz) = (fourier::forward(&y), fourier::forward(&z));
            for (a, b) in fy.iter().zip(&fz) {
                assert!((a.norm() - b.norm()).abs() < 1e-9);
            }
            assert!((fy[0] - fz[0]).norm() < 1e-9);
            if n % 2 == 0 {
                assert!((fy[n / 2] - fz[n / 2]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_order_breaks_ties_by_index() {
        let out = rank_order(&[1.0, 0.0, 1.0, 0.0], &[10.0, 20.0, 30.0, 40.0]);
        assert_eq!(out, vec![30.0, 10.0, 40.0, 20.0]);
    }

    #[test]
    fn method_names() {
        assert_eq!("aaft".parse::<SurrogateMethod>().unwrap(), SurrogateMethod::Aaft);
        assert_eq!(SurrogateMethod::Shuffle.to_string(), "shuffle");
        assert!("iaaft".parse::<SurrogateMethod>().is_err());
        assert!(EnsembleSpec::new(0, SurrogateMethod::Aaft, 1).is_err());
        assert_eq!(EnsembleSpec::new(3, SurrogateMethod::Aaft, u64::MAX).unwrap().seeds(), vec![u64::MAX, 0, 1]);
    }
}
