//! JSON report schema (`schema_version` 1).

use chrono::NaiveDate;
use mfdfa::engine::FluctuationSurface;
use mfdfa::gbm::GbmFitResult;
use mfdfa::spectra::{FitRange, HurstSpectrum, SingularitySpectrum, TauSpectrum};
use mfdfa::stats::{AcfResult, CcdfPoint, DecayFit, HillEstimate, TailFit, TailMethod};
use mfdfa::surrogate::ExcludedRealization;
use serde::Serialize;

use crate::config::AnalysisConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Toolkit {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Toolkit {
    fn default() -> Self {
        Self { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub toolkit: Toolkit,
    pub config: AnalysisConfig,
    pub series: Vec<SeriesReport>,
    /// Number of blocks (series, period or variant) that failed.
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub name: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_prices: Option<usize>,
    pub periods: Vec<PeriodReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
    pub n_returns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<Variants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Variants {
    pub original: VariantOutcome,
    pub shuffled: VariantOutcome,
    pub surrogate: VariantOutcome,
}

impl Variants {
    pub fn iter(&self) -> [(&'static str, &VariantOutcome); 3] {
        [("original", &self.original), ("shuffled", &self.shuffled), ("surrogate", &self.surrogate)]
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum VariantOutcome {
    Done(Box<VariantReport>),
    Failed { error: String },
}

impl VariantOutcome {
    pub fn report(&self) -> Option<&VariantReport> {
        match self {
            VariantOutcome::Done(r) => Some(r),
            VariantOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HurstRow {
    pub q: f64,
    pub h: f64,
    pub h_err: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauRow {
    pub q: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityRow {
    pub q: f64,
    pub alpha: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WidthReport {
    pub value: f64,
    pub monofractal: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum GbmReport {
    Fit {
        a: f64,
        a_err: f64,
        b: f64,
        b_err: f64,
        delta_alpha: f64,
        delta_alpha_err: f64,
        rss: f64,
        accepted: bool,
        monofractal: bool,
        at_boundary: bool,
    },
    Failed {
        error: String,
    },
}

impl From<&GbmFitResult<f64>> for GbmReport {
    fn from(f: &GbmFitResult<f64>) -> Self {
        GbmReport::Fit {
            a: f.params.a(),
            a_err: f.a_err,
            b: f.params.b(),
            b_err: f.b_err,
            delta_alpha: f.delta_alpha,
            delta_alpha_err: f.delta_alpha_err,
            rss: f.residual_sum_squares,
            accepted: f.accepted,
            monofractal: f.monofractal,
            at_boundary: f.at_boundary,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum TailReport {
    Fit {
        zeta: f64,
        zeta_err: f64,
        method: TailMethod,
        r2: f64,
        power_law: bool,
        tail_fraction: f64,
        n_points: usize,
        hill: HillEstimate<f64>,
    },
    Failed {
        error: String,
    },
}

impl From<&TailFit<f64>> for TailReport {
    fn from(t: &TailFit<f64>) -> Self {
        TailReport::Fit {
            zeta: t.zeta,
            zeta_err: t.zeta_err,
            method: t.method,
            r2: t.r2,
            power_law: t.power_law,
            tail_fraction: t.tail_fraction,
            n_points: t.n_points,
            hill: t.hill,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationDecay {
    pub gamma: f64,
    pub gamma_err: f64,
    pub r2: f64,
    /// `1 - gamma / 2`.
    pub hurst: f64,
}

impl From<&DecayFit<f64>> for CorrelationDecay {
    fn from(d: &DecayFit<f64>) -> Self {
        Self {
            gamma: d.exponent,
            gamma_err: d.exponent_err,
            r2: d.r2,
            hurst: mfdfa::stats::hurst_from_gamma(d.exponent),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum AcfSeries {
    Done {
        n: usize,
        max_lag: usize,
        c: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        power_law: Option<CorrelationDecay>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct AcfReport {
    pub returns: AcfSeries,
    pub window_r: usize,
    pub window_max: AcfSeries,
    pub window_min: AcfSeries,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub fit_range: FitRange,
    pub scale_grid: Vec<usize>,
    pub hurst: Vec<HurstRow>,
    pub tau: Vec<TauRow>,
    pub singularity: Vec<SingularityRow>,
    pub delta_alpha: WidthReport,
    pub gbm: GbmReport,
    pub tail: TailReport,
    pub acf: AcfReport,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<ExcludedRealization>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degenerate_cells: Vec<mfdfa::engine::DegenerateCell>,
    /// Plot data not carried in the JSON.
    #[serde(skip)]
    pub plot: PlotData,
}

#[derive(Debug, Clone, Default)]
pub struct PlotData {
    pub ccdf: Vec<CcdfPoint<f64>>,
    pub acf: Option<AcfResult<f64>>,
    pub surface: Option<FluctuationSurface<f64>>,
    pub hurst: Option<HurstSpectrum<f64>>,
    pub tau: Option<TauSpectrum<f64>>,
    pub singularity: Option<SingularitySpectrum<f64>>,
    /// Present only for an accepted GBM fit.
    pub gbm: Option<mfdfa::gbm::GbmParams<f64>>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}
