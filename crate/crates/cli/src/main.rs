use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mfdfa::engine::{fluctuation_surface, FluctuationSurface};
use mfdfa::gbm::{fit_gbm, gbm_series, FitOptions, GbmParams};
use mfdfa::series::{
    load_price_csv, log_returns, normalize, prices_from_returns, slice_period, window_extrema, write_price_csv,
    AnalysisPeriod, Extremum, ReturnSeries,
};
use mfdfa::spectra::{hurst_spectrum, singularity_spectrum, tau_from_h, HurstSpectrum};
use mfdfa::stats::{autocorrelation, ccdf_to_tsv, empirical_ccdf, power_law_decay, tail_exponent};
use mfdfa::surrogate::{realize, SurrogateMethod};
use mfdfa::synth::{correlated_noise, symmetric_pareto, white_noise, Correlation};
use mfdfa_cli::config::AnalysisConfig;
use mfdfa_cli::pipeline::{export_surrogates, run_pipeline, series_name};
use mfdfa_cli::plot::emit_plot_data;
use mfdfa_cli::report::AnalysisReport;
use mfdfa_cli::CliError;
use serde::Serialize;

/// Multifractal detrended fluctuation analysis of price series.
#[derive(Parser, Debug)]
#[command(name = "mfdfa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a `date,price` CSV and write its log returns as `date r` TSV.
    Ingest {
        #[command(flatten)]
        series: SeriesArgs,
        /// Output file [default: stdout].
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fluctuation function F_q(s) as TSV (`s`, then one `F_q=<q>` column per q).
    Mfdfa {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Output file [default: stdout].
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// h(q), tau(q) and f(alpha) TSVs from a price CSV or a saved F_q(s) table;
    /// prints the spectrum width as JSON.
    Spectra {
        #[command(flatten)]
        source: SpectraSource,
        #[command(flatten)]
        grid: GridArgs,
        /// Directory for `<name>_hurst.tsv`, `<name>_tau.tsv`, `<name>_falpha.tsv`.
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Fit the binomial cascade model to h(q); prints the fit as JSON.
    GbmFit {
        #[command(flatten)]
        source: FitSource,
        #[command(flatten)]
        grid: GridArgs,
        /// Weight residuals by 1/h_err^2.
        #[arg(long)]
        weighted: bool,
    },
    /// One shuffled or AAFT realization, written as a `date,price` CSV
    /// starting from the original first price.
    Surrogate {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Aaft)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file [default: stdout].
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Autocorrelation of normalized returns, or of window extrema, as `s C` TSV.
    Acf {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = mfdfa_cli::config::DEFAULT_ACF_MAX_LAG)]
        max_lag: usize,
        /// Use the maximum or minimum of each window of `--window-r` returns.
        #[arg(long, value_enum)]
        extremum: Option<ExtremumArg>,
        #[arg(long, default_value_t = mfdfa_cli::config::DEFAULT_WINDOW_R)]
        window_r: usize,
        /// Output file [default: stdout].
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Power-law tail exponent of |normalized returns|; prints JSON.
    Tail {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value_t = mfdfa::stats::DEFAULT_TAIL_FRACTION)]
        tail_fraction: f64,
        /// Also write the CCDF as `value P` TSV.
        #[arg(long)]
        ccdf: Option<PathBuf>,
    },
    /// Full analysis: original, shuffled and AAFT variants for every series
    /// and period; writes `report.json`, `config.toml` and plot TSVs.
    Pipeline(PipelineArgs),
    /// Synthetic series written as a `date,price` CSV whose log returns are
    /// the generated values.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
        /// Multiply the generated values by this factor.
        #[arg(long, default_value_t = 1.0, global = true)]
        scale: f64,
        /// Output file [default: stdout].
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SeriesArgs {
    /// `date,price` CSV.
    #[arg(long, short)]
    input: PathBuf,
    /// Restrict to `name:YYYY-MM-DD:YYYY-MM-DD`.
    #[arg(long)]
    period: Option<String>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SpectraSource {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// F_q(s) TSV as written by `mfdfa`.
    #[arg(long)]
    fluct: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FitSource {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// `q h [h_err [r2]]` TSV.
    #[arg(long)]
    hurst: Option<PathBuf>,
}

/// Analysis settings; each overrides the config file.
#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Detrending polynomial order [default: 2]
    #[arg(long)]
    order: Option<usize>,
    /// Smallest q [default: -10]
    #[arg(long, allow_negative_numbers = true)]
    q_min: Option<f64>,
    /// Largest q [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    q_max: Option<f64>,
    /// q spacing [default: 0.5]
    #[arg(long)]
    q_step: Option<f64>,
    /// Smallest scale [default: 6]
    #[arg(long)]
    s_min: Option<usize>,
    /// Largest scale [default: N/5]
    #[arg(long)]
    s_max: Option<usize>,
    /// Number of log-spaced scales [default: 30]
    #[arg(long)]
    n_scales: Option<usize>,
    /// Lower end of the h(q) fit range [default: 50, or 10 when N < 2000]
    #[arg(long)]
    fit_lo: Option<usize>,
    /// Upper end of the h(q) fit range [default: 800, or 60 when N < 2000]
    #[arg(long)]
    fit_hi: Option<usize>,
}

impl GridArgs {
    fn apply(&self, cfg: &mut AnalysisConfig) {
        let g = &mut cfg.mfdfa;
        set(&mut g.detrend_order, self.order);
        set(&mut g.q_min, self.q_min);
        set(&mut g.q_max, self.q_max);
        set(&mut g.q_step, self.q_step);
        set(&mut g.s_min, self.s_min);
        set(&mut g.n_scales, self.n_scales);
        if self.s_max.is_some() {
            g.s_max = self.s_max;
        }
        if self.fit_lo.is_some() {
            cfg.fit.s_lo = self.fit_lo;
        }
        if self.fit_hi.is_some() {
            cfg.fit.s_hi = self.fit_hi;
        }
    }

    fn config(&self) -> Result<AnalysisConfig, CliError> {
        let mut cfg = AnalysisConfig::default();
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// TOML config file (`.json` is read as JSON, e.g. a report's config echo).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Price CSV or directory of CSVs; repeatable, replaces the config's inputs.
    #[arg(long, short)]
    input: Vec<PathBuf>,
    /// [default: mfdfa-out]
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    /// Realizations per ensemble [default: 10]
    #[arg(long)]
    ensemble_n: Option<usize>,
    /// Base seed of the ensembles [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of the largest magnitudes in the tail fit [default: 0.05]
    #[arg(long)]
    tail_fraction: Option<f64>,
    /// Window length for the extrema ACF [default: 5]
    #[arg(long)]
    window_r: Option<usize>,
    /// `name:YYYY-MM-DD:YYYY-MM-DD`; repeatable, replaces the config's periods
    /// [default: one period over each whole series]
    #[arg(long)]
    period: Vec<String>,
    /// Worker threads [default: all cores]. Does not change any output.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write SVG line charts.
    #[arg(long)]
    svg: bool,
    /// Also write realization 0 of each ensemble as a price CSV.
    #[arg(long)]
    export_surrogates: bool,
}

#[derive(Subcommand, Debug)]
enum SynthKind {
    /// Binomial cascade of 2^n_max values.
    Gbm {
        #[arg(long, default_value_t = 0.6)]
        a: f64,
        #[arg(long, default_value_t = 0.9)]
        b: f64,
        #[arg(long, default_value_t = 14)]
        n_max: u32,
    },
    /// Gaussian white noise.
    White {
        #[arg(long, short, default_value_t = 8192)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Symmetric Pareto noise, P(|x| > v) = v^-tail_index.
    Pareto {
        #[arg(long, short, default_value_t = 16384)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        tail_index: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fourier-filtered Gaussian noise with exponential or power-law correlations.
    Correlated {
        #[arg(long, short, default_value_t = 8192)]
        n: usize,
        /// Exponential decay length.
        #[arg(long, conflicts_with = "beta")]
        crossover: Option<f64>,
        /// Spectral exponent in S(f) ~ f^-beta.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Shuffle,
    Aaft,
}

impl From<MethodArg> for SurrogateMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Shuffle => SurrogateMethod::Shuffle,
            MethodArg::Aaft => SurrogateMethod::Aaft,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExtremumArg {
    Max,
    Min,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Ingest { series, output } => {
            let x = load_returns(&series)?;
            let rows: Vec<String> =
                x.timestamps().iter().zip(x.values()).map(|(d, v)| format!("{d}\t{}", mfdfa::tsv::sci10(*v))).collect();
            let mut text = String::from("date\tr\n");
            for r in rows {
                text.push_str(&r);
                text.push('\n');
            }
            emit(output.as_deref(), &text)?;
        }
        Command::Mfdfa { series, grid, output } => {
            let x = load_returns(&series)?;
            let cfg = grid.config()?.mfdfa.for_length(x.len(), 0)?;
            emit(output.as_deref(), &fluctuation_surface(&x, &cfg)?.to_tsv())?;
        }
        Command::Spectra { source, grid, output_dir } => {
            let cfg = grid.config()?;
            let (name, surface, n) = match (&source.input, &source.fluct) {
                (Some(input), _) => {
                    let x = load_returns(&SeriesArgs { input: input.clone(), period: None })?;
                    (series_name(input), fluctuation_surface(&x, &cfg.mfdfa.for_length(x.len(), 0)?)?, x.len())
                }
                (None, Some(path)) => {
                    let surface = FluctuationSurface::from_tsv(&std::fs::read_to_string(path)?)?;
                    // A saved surface does not carry N; the default s_max = N/5 inverts to this.
                    let n = surface.scale_grid().last().map_or(0, |s| s * 5);
                    (series_name(path), surface, n)
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let h = hurst_spectrum(&surface, cfg.fit.for_length(n)?)?;
            let tau = tau_from_h(&h);
            let ss = singularity_spectrum(&tau)?;
            std::fs::create_dir_all(&output_dir)?;
            let stem = mfdfa_cli::plot::slug(&name);
            std::fs::write(output_dir.join(format!("{stem}_hurst.tsv")), h.to_tsv())?;
            std::fs::write(output_dir.join(format!("{stem}_tau.tsv")), tau.to_tsv())?;
            std::fs::write(output_dir.join(format!("{stem}_falpha.tsv")), ss.to_tsv())?;
            print_json(&ss.width_at_zero)?;
        }
        Command::GbmFit { source, grid, weighted } => {
            let h: HurstSpectrum<f64> = match (&source.input, &source.hurst) {
                (Some(input), _) => {
                    let cfg = grid.config()?;
                    let x = load_returns(&SeriesArgs { input: input.clone(), period: None })?;
                    let surface = fluctuation_surface(&x, &cfg.mfdfa.for_length(x.len(), 0)?)?;
                    hurst_spectrum(&surface, cfg.fit.for_length(x.len())?)?
                }
                (None, Some(path)) => HurstSpectrum::from_tsv(&std::fs::read_to_string(path)?)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            print_json(&fit_gbm(&h, FitOptions { weighted })?)?;
        }
        Command::Surrogate { series, method, seed, output } => {
            let prices = load_prices(&series.input)?;
            let x = restrict(log_returns(&prices), series.period.as_deref())?;
            let r = realize(&x, method.into(), seed)?;
            let first = prices.prices()[0];
            let mut buf = Vec::new();
            write_price_csv(&prices_from_returns(&r, first, NaiveDate::default())?, &mut buf)?;
            emit(output.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
        Command::Acf { series, max_lag, extremum, window_r, output } => {
            let x = load_returns(&series)?;
            let x = match extremum {
                Some(ExtremumArg::Max) => window_extrema(&x, window_r, Extremum::Max)?,
                Some(ExtremumArg::Min) => window_extrema(&x, window_r, Extremum::Min)?,
                None => x,
            };
            let z = normalize(&x)?;
            let acf = autocorrelation(&z, max_lag.min(z.len() / 4))?;
            emit(output.as_deref(), &acf.to_tsv())?;
            if output.is_some() {
                if let Ok(d) = power_law_decay(&acf) {
                    print_json(&d)?;
                }
            }
        }
        Command::Tail { series, tail_fraction, ccdf } => {
            let z = normalize(&load_returns(&series)?)?;
            let points = empirical_ccdf(&z)?;
            if let Some(path) = ccdf {
                std::fs::write(path, ccdf_to_tsv(&points))?;
            }
            print_json(&tail_exponent(&points, tail_fraction)?)?;
        }
        Command::Pipeline(args) => return pipeline(args),
        Command::Synth { kind, scale, output } => {
            let values: Vec<f64> = match kind {
                SynthKind::Gbm { a, b, n_max } => gbm_series(&GbmParams::new(a, b)?, n_max)?,
                SynthKind::White { n, seed } => white_noise(n, seed),
                SynthKind::Pareto { n, tail_index, seed } => symmetric_pareto(n, tail_index, seed)?,
                SynthKind::Correlated { n, crossover, beta, seed } => {
                    let corr = match (crossover, beta) {
                        (Some(c), None) => Correlation::Exponential { crossover: c },
                        (None, Some(b)) => Correlation::PowerLaw { beta: b },
                        _ => return Err(CliError::Config("give exactly one of --crossover and --beta".into())),
                    };
                    correlated_noise(n, corr, seed)?
                }
            };
            let r = ReturnSeries::undated("synth", values.into_iter().map(|v| v * scale).collect())?;
            let origin = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
            let mut buf = Vec::new();
            write_price_csv(&prices_from_returns(&r, 1.0, origin)?, &mut buf)?;
            emit(output.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
    }
    Ok(0)
}

fn pipeline(args: PipelineArgs) -> Result<u8, CliError> {
    let mut cfg = match &args.config {
        Some(path) => AnalysisConfig::load(path)?,
        None => AnalysisConfig::default(),
    };
    if !args.input.is_empty() {
        cfg.inputs = args.input.clone();
    }
    if let Some(dir) = &args.output_dir {
        cfg.output_dir = dir.clone();
    }
    args.grid.apply(&mut cfg);
    set(&mut cfg.ensemble.n_realizations, args.ensemble_n);
    set(&mut cfg.ensemble.seed, args.seed);
    set(&mut cfg.tail_fraction, args.tail_fraction);
    set(&mut cfg.window_r, args.window_r);
    if !args.period.is_empty() {
        cfg.periods = args
            .period
            .iter()
            .map(|p| AnalysisPeriod::parse(p).map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<_, _>>()?;
    }
    cfg.svg |= args.svg;
    cfg.export_surrogates |= args.export_surrogates;

    let report = match args.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| run_pipeline(&cfg))?,
        None => run_pipeline(&cfg)?,
    };
    write_outputs(&cfg, &report)?;
    summarize(&report);
    Ok(if report.failures == 0 { 0 } else { 1 })
}

fn write_outputs(cfg: &AnalysisConfig, report: &AnalysisReport) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    emit_plot_data(report, dir, cfg.svg)?;
    if cfg.export_surrogates {
        export_surrogates(cfg, report, dir)?;
    }
    Ok(())
}

fn summarize(report: &AnalysisReport) {
    use mfdfa_cli::report::GbmReport;
    println!("series\tperiod\tvariant\tN\tdelta_alpha\tgbm_a\tgbm_b\taccepted");
    for s in &report.series {
        if let Some(e) = &s.error {
            println!("{}\t-\t-\t-\terror: {e}", s.name);
        }
        for p in &s.periods {
            let Some(v) = &p.variants else {
                println!("{}\t{}\t-\t{}\terror: {}", s.name, p.name, p.n_returns, p.error.as_deref().unwrap_or(""));
                continue;
            };
            for (variant, outcome) in v.iter() {
                match outcome.report() {
                    Some(r) => {
                        let (a, b, ok) = match &r.gbm {
                            GbmReport::Fit { a, b, accepted, .. } => {
                                (format!("{a:.4}"), format!("{b:.4}"), accepted.to_string())
                            }
                            GbmReport::Failed { .. } => ("-".into(), "-".into(), "-".into()),
                        };
                        println!(
                            "{}\t{}\t{variant}\t{}\t{:.4}\t{a}\t{b}\t{ok}",
                            s.name, p.name, p.n_returns, r.delta_alpha.value
                        );
                    }
                    None => println!("{}\t{}\t{variant}\t{}\tfailed", s.name, p.name, p.n_returns),
                }
            }
        }
    }
    if report.failures > 0 {
        eprintln!("{} block(s) failed; see report.json", report.failures);
    }
}

fn load_prices(path: &Path) -> Result<mfdfa::PriceSeries64, CliError> {
    Ok(load_price_csv(File::open(path)?, &series_name(path))?)
}

fn restrict(x: ReturnSeries<f64>, period: Option<&str>) -> Result<ReturnSeries<f64>, CliError> {
    match period {
        Some(p) => {
            let p = AnalysisPeriod::parse(p).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(slice_period(&x, &p)?)
        }
        None => Ok(x),
    }
}

fn load_returns(args: &SeriesArgs) -> Result<ReturnSeries<f64>, CliError> {
    restrict(log_returns(&load_prices(&args.input)?), args.period.as_deref())
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
