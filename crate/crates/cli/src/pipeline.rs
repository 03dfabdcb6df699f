//! End-to-end analysis: ingest, slice, MF-DFA on the original series and
//! on shuffled and AAFT ensembles, spectra, GBM fits, tails and ACFs.

use std::fs::File;
use std::path::Path;

use mfdfa::engine::{fluctuation_surface, MfdfaConfig};
use mfdfa::gbm::{fit_gbm, FitOptions};
use mfdfa::series::{
    load_price_csv, log_returns, normalize, prices_from_returns, slice_period, window_extrema, write_price_csv,
    AnalysisPeriod, Extremum, ReturnSeries,
};
use mfdfa::spectra::{hurst_spectrum, singularity_spectrum, tau_from_h, FitRange};
use mfdfa::stats::{autocorrelation, empirical_ccdf, power_law_decay, tail_exponent};
use mfdfa::surrogate::{ensemble_hurst, realize, EnsembleSpec, SurrogateMethod};
use rayon::prelude::*;

use crate::config::AnalysisConfig;
use crate::report::*;
use crate::CliError;

const VARIANTS: [Option<SurrogateMethod>; 3] = [None, Some(SurrogateMethod::Shuffle), Some(SurrogateMethod::Aaft)];

/// Series name used in output file names: the file stem.
pub fn series_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "series".into())
}

struct Block<'a> {
    returns: ReturnSeries<f64>,
    period: Option<&'a AnalysisPeriod>,
}

/// Runs every series, period and variant. Failures are recorded in the
/// report and counted; they do not stop the other blocks.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<AnalysisReport, CliError> {
    cfg.validate()?;
    let files = cfg.resolve_inputs()?;
    let series: Vec<SeriesReport> = files.par_iter().map(|path| run_series(cfg, path)).collect();
    let failures = series.iter().map(count_failures).sum();
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        toolkit: Toolkit::default(),
        config: cfg.clone(),
        series,
        failures,
    })
}

fn count_failures(s: &SeriesReport) -> usize {
    let own = usize::from(s.error.is_some());
    own + s
        .periods
        .iter()
        .map(|p| {
            usize::from(p.error.is_some())
                + p.variants.as_ref().map_or(0, |v| {
                    v.iter()
                        .iter()
                        .map(|(_, o)| match o {
                            VariantOutcome::Failed { .. } => 1,
                            VariantOutcome::Done(r) => variant_failures(r),
                        })
                        .sum()
                })
        })
        .sum::<usize>()
}

fn variant_failures(r: &VariantReport) -> usize {
    let acf_failed = |a: &AcfSeries| matches!(a, AcfSeries::Failed { .. });
    usize::from(matches!(r.gbm, GbmReport::Failed { .. }))
        + usize::from(matches!(r.tail, TailReport::Failed { .. }))
        + usize::from(acf_failed(&r.acf.returns) || acf_failed(&r.acf.window_max) || acf_failed(&r.acf.window_min))
}

fn run_series(cfg: &AnalysisConfig, path: &Path) -> SeriesReport {
    let name = series_name(path);
    let source = path.display().to_string();
    let loaded = File::open(path).map_err(CliError::from).and_then(|f| Ok(load_price_csv::<f64, _>(f, &name)?));
    let prices = match loaded {
        Ok(p) => p,
        Err(e) => {
            log::error!("{source}: {e}");
            return SeriesReport { name, source, n_prices: None, periods: Vec::new(), error: Some(e.to_string()) };
        }
    };
    let returns = log_returns(&prices);
    let blocks: Vec<(String, Result<Block, CliError>)> = if cfg.periods.is_empty() {
        vec![("full".to_string(), Ok(Block { returns, period: None }))]
    } else {
        cfg.periods
            .iter()
            .map(|p| {
                (
                    p.name.clone(),
                    slice_period(&returns, p).map(|r| Block { returns: r, period: Some(p) }).map_err(Into::into),
                )
            })
            .collect()
    };
    let periods = blocks
        .into_par_iter()
        .map(|(period_name, block)| match block {
            Ok(b) => run_period(cfg, &name, period_name, b),
            Err(e) => {
                log::error!("{name}/{period_name}: {e}");
                PeriodReport {
                    name: period_name,
                    start: None,
                    end: None,
                    n_returns: 0,
                    variants: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    SeriesReport { name, source, n_prices: Some(prices.len()), periods, error: None }
}

fn run_period(cfg: &AnalysisConfig, series: &str, name: String, block: Block) -> PeriodReport {
    let x = block.returns;
    let n = x.len();
    let (start, end) = match block.period {
        Some(p) => (Some(p.start), Some(p.end)),
        None => (x.timestamps().first().copied(), x.timestamps().last().copied()),
    };
    let setup = cfg.mfdfa.for_length(n, cfg.ensemble.seed).and_then(|m| Ok((m, cfg.fit.for_length(n)?)));
    let (mcfg, range) = match setup {
        Ok(s) => s,
        Err(e) => {
            log::error!("{series}/{name}: {e}");
            return PeriodReport { name, start, end, n_returns: n, variants: None, error: Some(e.to_string()) };
        }
    };
    let mut outcomes: Vec<VariantOutcome> = VARIANTS
        .par_iter()
        .map(|method| match run_variant(cfg, &x, &mcfg, range, *method) {
            Ok(r) => VariantOutcome::Done(Box::new(r)),
            Err(e) => {
                log::error!("{series}/{name}/{}: {e}", method.map_or("original".to_string(), |m| m.to_string()));
                VariantOutcome::Failed { error: e.to_string() }
            }
        })
        .collect();
    let surrogate = outcomes.pop().expect("three variants");
    let shuffled = outcomes.pop().expect("three variants");
    let original = outcomes.pop().expect("three variants");
    PeriodReport {
        name,
        start,
        end,
        n_returns: n,
        variants: Some(Variants { original, shuffled, surrogate }),
        error: None,
    }
}

fn run_variant(
    cfg: &AnalysisConfig,
    x: &ReturnSeries<f64>,
    mcfg: &MfdfaConfig<f64>,
    range: FitRange,
    method: Option<SurrogateMethod>,
) -> Result<VariantReport, CliError> {
    // Realization 0 stands in for the ensemble in the per-series diagnostics.
    let (sample, surface, hurst, seeds, excluded) = match method {
        None => {
            let surface = fluctuation_surface(x, mcfg)?;
            let hurst = hurst_spectrum(&surface, range)?;
            (x.clone(), surface, hurst, Vec::new(), Vec::new())
        }
        Some(m) => {
            let spec = EnsembleSpec::new(cfg.ensemble.n_realizations, m, cfg.ensemble.seed)?;
            let e = ensemble_hurst(x, &spec, mcfg, range)?;
            let sample = realize(x, m, spec.seed(0))?;
            let surface = fluctuation_surface(&sample, mcfg)?;
            (sample, surface, e.spectrum, e.seeds, e.excluded)
        }
    };
    let tau = tau_from_h(&hurst);
    let singularity = singularity_spectrum(&tau)?;
    let width = singularity.width_at_zero;

    let fit = fit_gbm(&hurst, FitOptions::default());
    let gbm = match &fit {
        Ok(f) => GbmReport::from(f),
        Err(e) => GbmReport::Failed { error: e.to_string() },
    };
    let accepted = fit.as_ref().ok().filter(|f| f.accepted).map(|f| f.params);

    let z = normalize(&sample)?;
    let ccdf = empirical_ccdf(&z).unwrap_or_default();
    let tail = match tail_exponent(&ccdf, cfg.tail_fraction) {
        Ok(t) => TailReport::from(&t),
        Err(e) => TailReport::Failed { error: e.to_string() },
    };
    let (acf_returns, acf_data) = acf_of(&z, cfg.acf_max_lag);
    let window = |mode| {
        window_extrema(&sample, cfg.window_r, mode)
            .and_then(|w| normalize(&w))
            .map(|w| acf_of(&w, cfg.acf_max_lag).0)
            .unwrap_or_else(|e| AcfSeries::Failed { error: e.to_string() })
    };

    Ok(VariantReport {
        fit_range: range,
        scale_grid: mcfg.scale_grid.clone(),
        hurst: hurst
            .q
            .iter()
            .enumerate()
            .map(|(i, &q)| HurstRow { q, h: hurst.h[i], h_err: hurst.h_err[i], r2: hurst.r2[i] })
            .collect(),
        tau: tau.q.iter().zip(&tau.tau).map(|(&q, &t)| TauRow { q, tau: t }).collect(),
        singularity: singularity.points.iter().map(|p| SingularityRow { q: p.q, alpha: p.alpha, f: p.f }).collect(),
        delta_alpha: WidthReport { value: width.value, monofractal: width.monofractal },
        gbm,
        tail,
        acf: AcfReport {
            returns: acf_returns,
            window_r: cfg.window_r,
            window_max: window(Extremum::Max),
            window_min: window(Extremum::Min),
        },
        seeds,
        excluded,
        degenerate_cells: surface.degenerate_cells(),
        plot: PlotData {
            ccdf,
            acf: acf_data,
            surface: Some(surface),
            hurst: Some(hurst),
            tau: Some(tau),
            singularity: Some(singularity),
            gbm: accepted,
        },
    })
}

fn acf_of(z: &ReturnSeries<f64>, max_lag: usize) -> (AcfSeries, Option<mfdfa::stats::AcfResult<f64>>) {
    let lag = max_lag.min(z.len() / 4);
    match autocorrelation(z, lag) {
        Ok(a) => {
            let decay = power_law_decay(&a).ok().map(|d| CorrelationDecay::from(&d));
            (AcfSeries::Done { n: z.len(), max_lag: lag, c: a.c.clone(), power_law: decay }, Some(a))
        }
        Err(e) => (AcfSeries::Failed { error: e.to_string() }, None),
    }
}

/// Writes realization 0 of each ensemble as a `date,price` CSV next to the
/// report, starting from price 1.
pub fn export_surrogates(
    cfg: &AnalysisConfig,
    report: &AnalysisReport,
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut written = Vec::new();
    for s in &report.series {
        if s.error.is_some() {
            continue;
        }
        let path = Path::new(&s.source);
        let prices = load_price_csv::<f64, _>(File::open(path)?, &s.name)?;
        let returns = log_returns(&prices);
        for p in &s.periods {
            if p.variants.is_none() {
                continue;
            }
            let x = match cfg.periods.iter().find(|c| c.name == p.name) {
                Some(period) => slice_period(&returns, period)?,
                None => returns.clone(),
            };
            for (variant, method) in [("shuffled", SurrogateMethod::Shuffle), ("surrogate", SurrogateMethod::Aaft)] {
                let r = realize(&x, method, cfg.ensemble.seed)?;
                let origin = x.timestamps().first().copied().unwrap_or_default();
                let out = dir.join(format!(
                    "{}_{}_{}_series.csv",
                    crate::plot::slug(&s.name),
                    crate::plot::slug(&p.name),
                    variant
                ));
                write_price_csv(&prices_from_returns(&r, 1.0, origin)?, File::create(&out)?)?;
                written.push(out);
            }
        }
    }
    Ok(written)
}
