//! Analysis configuration: TOML on disk, echoed into the JSON report.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use mfdfa::engine::{default_scale_grid, uniform_q_grid, MfdfaConfig, DEFAULT_N_SCALES, DEFAULT_ORDER, DEFAULT_S_MIN};
use mfdfa::series::AnalysisPeriod;
use mfdfa::spectra::FitRange;
use mfdfa::stats::DEFAULT_TAIL_FRACTION;
use mfdfa::surrogate::DEFAULT_REALIZATIONS;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_WINDOW_R: usize = 5;
pub const DEFAULT_ACF_MAX_LAG: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub detrend_order: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub s_min: usize,
    /// Defaults to `N / 5`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    pub n_scales: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            detrend_order: DEFAULT_ORDER,
            q_min: -10.0,
            q_max: 10.0,
            q_step: 0.5,
            s_min: DEFAULT_S_MIN,
            s_max: None,
            n_scales: DEFAULT_N_SCALES,
        }
    }
}

impl GridConfig {
    pub fn q_grid(&self) -> Result<Vec<f64>, CliError> {
        Ok(uniform_q_grid(self.q_min, self.q_max, self.q_step)?)
    }

    /// Engine settings for a series of `n` values.
    pub fn for_length(&self, n: usize, seed: u64) -> Result<MfdfaConfig<f64>, CliError> {
        let s_max = self.s_max.unwrap_or(n / 5);
        let cfg = MfdfaConfig {
            detrend_order: self.detrend_order,
            q_grid: self.q_grid()?,
            scale_grid: default_scale_grid(n, self.detrend_order, self.s_min, s_max, self.n_scales)?,
            seed,
        };
        cfg.validate(n)?;
        Ok(cfg)
    }
}

/// Either bound may be overridden; the other keeps its length default.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_hi: Option<usize>,
}

impl FitConfig {
    pub fn for_length(&self, n: usize) -> Result<FitRange, CliError> {
        let d = FitRange::default_for_length(n);
        Ok(FitRange::new(self.s_lo.unwrap_or(d.s_lo), self.s_hi.unwrap_or(d.s_hi))?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_realizations: DEFAULT_REALIZATIONS, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// CSV files, or directories whose `*.csv` files are all used.
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    /// Empty means one period spanning each whole series.
    pub periods: Vec<AnalysisPeriod>,
    pub tail_fraction: f64,
    pub window_r: usize,
    pub acf_max_lag: usize,
    pub svg: bool,
    pub export_surrogates: bool,
    pub mfdfa: GridConfig,
    pub fit: FitConfig,
    pub ensemble: EnsembleConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            output_dir: PathBuf::from("mfdfa-out"),
            periods: Vec::new(),
            tail_fraction: DEFAULT_TAIL_FRACTION,
            window_r: DEFAULT_WINDOW_R,
            acf_max_lag: DEFAULT_ACF_MAX_LAG,
            svg: false,
            export_surrogates: false,
            mfdfa: GridConfig::default(),
            fit: FitConfig::default(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl AnalysisConfig {
    /// TOML, or JSON when the extension is `.json` (a report's config echo
    /// can be fed back this way after extracting it).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.mfdfa.detrend_order < 1 {
            return bad("detrend_order must be at least 1".into());
        }
        let q = self.mfdfa.q_grid()?;
        for required in [0.0, 2.0] {
            if !q.contains(&required) {
                return bad(format!(
                    "q grid {}..{} step {} must contain {required}",
                    self.mfdfa.q_min, self.mfdfa.q_max, self.mfdfa.q_step
                ));
            }
        }
        if self.mfdfa.n_scales < 2 {
            return bad("n_scales must be at least 2".into());
        }
        if self.ensemble.n_realizations == 0 {
            return bad("ensemble.n_realizations must be at least 1".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad(format!("tail_fraction must be in (0, 1], got {}", self.tail_fraction));
        }
        if self.window_r == 0 || self.acf_max_lag == 0 {
            return bad("window_r and acf_max_lag must be positive".into());
        }
        if let (Some(lo), Some(hi)) = (self.fit.s_lo, self.fit.s_hi) {
            FitRange::new(lo, hi)?;
        }
        let mut names = BTreeSet::new();
        for p in &self.periods {
            AnalysisPeriod::new(p.name.clone(), p.start, p.end)?;
            if !names.insert(p.name.as_str()) {
                return bad(format!("duplicate period name `{}`", p.name));
            }
        }
        Ok(())
    }

    /// Input files in a stable order: listed files as given, directory
    /// contents sorted by name.
    pub fn resolve_inputs(&self) -> Result<Vec<PathBuf>, CliError> {
        let mut files = Vec::new();
        for p in &self.inputs {
            if p.is_dir() {
                let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|f| f.is_file() && f.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
                    .collect();
                found.sort();
                files.extend(found);
            } else if p.is_file() {
                files.push(p.clone());
            } else {
                return Err(CliError::Config(format!("input {} does not exist", p.display())));
            }
        }
        if files.is_empty() {
            return Err(CliError::NoInputs);
        }
        Ok(files)
    }
}
