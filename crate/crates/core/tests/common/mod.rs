#![allow(dead_code)]

use mfdfa::engine::{fluctuation_surface, MfdfaConfig};
use mfdfa::series::ReturnSeries;
use mfdfa::spectra::{hurst_spectrum, singularity_spectrum, spectrum_width, tau_from_h, FitRange, HurstSpectrum};

pub fn series(values: Vec<f64>) -> ReturnSeries<f64> {
    ReturnSeries::undated("test", values).unwrap()
}

pub fn hurst_with_order(values: Vec<f64>, order: usize) -> HurstSpectrum<f64> {
    let n = values.len();
    let mut cfg = MfdfaConfig::for_length(n).unwrap();
    cfg.detrend_order = order;
    let surf = fluctuation_surface(&series(values), &cfg).unwrap();
    hurst_spectrum(&surf, FitRange::default_for_length(n)).unwrap()
}

pub fn hurst(values: Vec<f64>) -> HurstSpectrum<f64> {
    hurst_with_order(values, 2)
}

pub fn width(h: &HurstSpectrum<f64>) -> f64 {
    spectrum_width(&singularity_spectrum(&tau_from_h(h)).unwrap()).unwrap().value
}

/// Per-q mean of several spectra on the same grid.
pub fn mean_spectrum(all: &[HurstSpectrum<f64>]) -> HurstSpectrum<f64> {
    let mut out = all[0].clone();
    for i in 0..out.q.len() {
        out.h[i] = all.iter().map(|h| h.h[i]).sum::<f64>() / all.len() as f64;
    }
    out
}

pub fn spread(h: &HurstSpectrum<f64>) -> f64 {
    let hi = h.h.iter().cloned().fold(f64::MIN, f64::max);
    let lo = h.h.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo
}
