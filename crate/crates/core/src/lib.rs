//! Multifractal detrended fluctuation analysis (MF-DFA) of return series,
//! shuffled and AAFT surrogate ensembles, and fitting of the two-parameter
//! generalized binomial multifractal model to Hurst spectra.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod engine;
pub mod error;
pub mod fourier;
pub mod gbm;
mod optimize;
pub mod regression;
pub mod scalar;
pub mod series;
pub mod spectra;
pub mod stats;
pub mod surrogate;
pub mod synth;
pub mod tsv;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PriceSeries64 = series::PriceSeries<f64>;
pub type ReturnSeries64 = series::ReturnSeries<f64>;
pub type MfdfaConfig64 = engine::MfdfaConfig<f64>;
pub type FluctuationSurface64 = engine::FluctuationSurface<f64>;
pub type HurstSpectrum64 = spectra::HurstSpectrum<f64>;
pub type TauSpectrum64 = spectra::TauSpectrum<f64>;
pub type SingularitySpectrum64 = spectra::SingularitySpectrum<f64>;
pub type GbmParams64 = gbm::GbmParams<f64>;
pub type GbmFitResult64 = gbm::GbmFitResult<f64>;
pub type AcfResult64 = stats::AcfResult<f64>;
pub type TailFit64 = stats::TailFit<f64>;
