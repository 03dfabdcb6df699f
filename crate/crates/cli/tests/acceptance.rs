//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. Seeds and tolerances are fixed here.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mfdfa::engine::{fluctuation_surface, MfdfaConfig};
use mfdfa::gbm::{delta_alpha, fit_gbm, gbm_alpha, gbm_h, gbm_series, gbm_tau, FitOptions, GbmParams};
use mfdfa::series::{normalize, ReturnSeries};
use mfdfa::spectra::{hurst_spectrum, singularity_spectrum, tau_from_h, FitRange, HurstSpectrum, TauSpectrum};
use mfdfa::stats::{autocorrelation, empirical_ccdf, tail_exponent};
use mfdfa::surrogate::{aaft, ensemble_hurst, realize, EnsembleSpec, RngStream, SurrogateMethod};
use mfdfa::synth::{correlated_noise, symmetric_pareto, white_noise, Correlation};

const H_TOL: f64 = 0.05;
const FIT_TOL: f64 = 0.03;
const RUNTIME_LIMIT: Duration = Duration::from_secs(30);
const TABLE_TOL: f64 = 0.005;
const WHITE_H2: (f64, f64) = (0.45, 0.55);
const WHITE_SPREAD: f64 = 0.15;
const WHITE_WIDTH: f64 = 0.2;
const BIFRACTAL_TOL: f64 = 0.15;
const F_AT_ALPHA0_TOL: f64 = 1e-9;
const GBM_IDENTITY_TOL: f64 = 1e-12;
const ZETA_RANGE: (f64, f64) = (2.7, 3.3);
const ACF_TOL: f64 = 0.1;
const FD_TOL: f64 = 1e-6;

const GENERATION_SEED: u64 = 0;
const SHUFFLE_SEED: u64 = 0;
const ENSEMBLE_BASE_SEED: u64 = 0;
const WHITE_SEEDS: std::ops::Range<u64> = 0..10;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn series(values: Vec<f64>) -> ReturnSeries<f64> {
    ReturnSeries::undated("acceptance", values).unwrap()
}

fn default_hurst(x: &ReturnSeries<f64>) -> HurstSpectrum<f64> {
    let cfg = MfdfaConfig::for_length(x.len()).unwrap();
    hurst_spectrum(&fluctuation_surface(x, &cfg).unwrap(), FitRange::default_for_length(x.len())).unwrap()
}

fn width(h: &HurstSpectrum<f64>) -> f64 {
    singularity_spectrum(&tau_from_h(h)).unwrap().width_at_zero.value
}

fn cascade() -> ReturnSeries<f64> {
    series(gbm_series(&GbmParams::new(0.6, 0.9).unwrap(), 14).unwrap())
}

fn gbm_roundtrip() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (h, fit) = pool.install(|| {
        let h = default_hurst(&cascade());
        let fit = fit_gbm(&h, FitOptions::default()).unwrap();
        (h, fit)
    });
    let elapsed = start.elapsed();
    let truth = GbmParams::new(0.6, 0.9).unwrap();
    let worst =
        h.q.iter()
            .zip(&h.h)
            .filter(|(q, _)| q.abs() <= 5.0)
            .map(|(&q, &hq)| (hq - gbm_h(q, &truth)).abs())
            .fold(0.0, f64::max);
    let (a, b) = (fit.params.a(), fit.params.b());
    let pass = worst <= H_TOL && (a - 0.6).abs() <= FIT_TOL && (b - 0.9).abs() <= FIT_TOL && elapsed < RUNTIME_LIMIT;
    outcome(
        pass,
        format!("max |h - h_gbm| on [-5, 5] = {worst:.4} (tol {H_TOL}); fit a = {a:.4}, b = {b:.4} (tol {FIT_TOL}); {:.2} s", elapsed.as_secs_f64()),
    )
}

fn table_arithmetic() -> Outcome {
    let rows: [(f64, f64, f64); 5] = [
        (0.575, 0.904, 0.652),
        (0.572, 0.933, 0.706),
        (0.585, 0.929, 0.667),
        (0.640, 0.816, 0.351),
        (0.618, 0.771, 0.319),
    ];
    let mut worst: f64 = 0.0;
    for (a, b, expected) in rows {
        worst = worst.max((delta_alpha(&GbmParams::new(a, b).unwrap()) - expected).abs());
    }
    outcome(worst <= TABLE_TOL, format!("max deviation {worst:.5} over 5 rows (tol {TABLE_TOL})"))
}

fn monofractal_control() -> Outcome {
    let all: Vec<HurstSpectrum<f64>> =
        WHITE_SEEDS.map(|seed| default_hurst(&series(white_noise(8192, seed)))).collect();
    let mut mean = all[0].clone();
    for i in 0..mean.q.len() {
        mean.h[i] = all.iter().map(|h| h.h[i]).sum::<f64>() / all.len() as f64;
    }
    let h2 = mean.at(2.0).unwrap();
    let hi = mean.h.iter().cloned().fold(f64::MIN, f64::max);
    let lo = mean.h.iter().cloned().fold(f64::MAX, f64::min);
    let w = width(&mean);
    let pass = (WHITE_H2.0..=WHITE_H2.1).contains(&h2) && hi - lo < WHITE_SPREAD && w < WHITE_WIDTH;
    outcome(
        pass,
        format!(
            "mean h(2) = {h2:.4} (range {:?}); spread = {:.4} (< {WHITE_SPREAD}); width = {w:.4} (< {WHITE_WIDTH}); seeds {}..{}",
            WHITE_H2,
            hi - lo,
            WHITE_SEEDS.start,
            WHITE_SEEDS.end - 1
        ),
    )
}

fn bifractal_oracle() -> Outcome {
    let x = series(symmetric_pareto(16384, 1.5, GENERATION_SEED).unwrap());
    let shuffled = realize(&x, SurrogateMethod::Shuffle, SHUFFLE_SEED).unwrap();
    let h = default_hurst(&shuffled);
    let mut worst: f64 = 0.0;
    for q in [2.0, 3.0, 4.0, 5.0] {
        worst = worst.max((h.at(q).unwrap() - 1.0 / q).abs());
    }
    for q in [-2.0, -1.0, 0.5] {
        worst = worst.max((h.at(q).unwrap() - 1.0 / 1.5).abs());
    }
    let fit = fit_gbm(&h, FitOptions::default()).unwrap();
    let rss_per_point = fit.residual_sum_squares / fit.n_points as f64;
    outcome(
        worst <= BIFRACTAL_TOL && !fit.accepted,
        format!(
            "max |h - bifractal| = {worst:.4} (tol {BIFRACTAL_TOL}); GBM RSS/n = {rss_per_point:.4}, rejected = {}",
            !fit.accepted
        ),
    )
}

fn source_diagnosis() -> Outcome {
    let x = cascade();
    let cfg = MfdfaConfig::for_length(x.len()).unwrap();
    let range = FitRange::default_for_length(x.len());
    let original = width(&default_hurst(&x));
    let ensemble = |method| {
        let spec = EnsembleSpec::new(10, method, ENSEMBLE_BASE_SEED).unwrap();
        (spec.seeds(), width(&ensemble_hurst(&x, &spec, &cfg, range).unwrap().spectrum))
    };
    let (_, shuffled) = ensemble(SurrogateMethod::Shuffle);
    let (seeds, surrogate) = ensemble(SurrogateMethod::Aaft);
    let sorted = |v: &[f64]| {
        let mut v: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        v.sort_unstable();
        v
    };
    let want = sorted(x.values());
    let multiset = seeds.iter().all(|&s| sorted(realize(&x, SurrogateMethod::Aaft, s).unwrap().values()) == want);
    outcome(
        shuffled < 0.5 * original && multiset && surrogate < original,
        format!(
            "width original = {original:.4}, shuffled = {shuffled:.4} (< {:.4}), AAFT = {surrogate:.4}; AAFT multiset preserved = {multiset}",
            0.5 * original
        ),
    )
}

fn exactness() -> Outcome {
    let mut tau0 = true;
    let mut f_err: f64 = 0.0;
    for values in [white_noise(4096, 1), gbm_series(&GbmParams::new(0.6, 0.9).unwrap(), 12).unwrap()] {
        let tau = tau_from_h(&default_hurst(&series(values)));
        let i0 = tau.q.iter().position(|&q| q == 0.0).unwrap();
        tau0 &= tau.tau[i0] == -1.0;
        let ss = singularity_spectrum(&tau).unwrap();
        f_err = f_err.max((ss.points[i0].f - 1.0).abs());
    }
    let mut identity: f64 = 0.0;
    for (a, b) in [(0.6, 0.9), (0.575, 0.904), (0.3, 0.95), (0.5, 0.5), (0.9, 0.6)] {
        let p = GbmParams::new(a, b).unwrap();
        for q in mfdfa::engine::default_q_grid::<f64>() {
            identity = identity.max((q * gbm_h(q, &p) - 1.0 - gbm_tau(q, &p)).abs());
        }
    }
    let mut rng = RngStream::new(6);
    let mut violations = 0;
    for trial in 0..100u64 {
        let n = 200 + rng.index(1800);
        let values = if trial % 2 == 0 {
            white_noise(n, 1000 + trial)
        } else {
            symmetric_pareto(n, 1.0 + rng.uniform() * 2.0, 1000 + trial).unwrap()
        };
        let surf = fluctuation_surface(&series(values), &MfdfaConfig::for_length(n).unwrap()).unwrap();
        for si in 0..surf.scale_grid().len() {
            for qi in 1..surf.q_grid().len() {
                if let (Some(lo), Some(hi)) = (surf.get(qi - 1, si), surf.get(qi, si)) {
                    if hi < lo * (1.0 - 1e-12) {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        tau0 && f_err <= F_AT_ALPHA0_TOL && identity <= GBM_IDENTITY_TOL && violations == 0,
        format!(
            "tau(0) = -1 exactly: {tau0}; |f(alpha(0)) - 1| = {f_err:.1e}; max |q h - 1 - tau| = {identity:.1e}; F_q decreases in q: {violations} cells over 100 inputs"
        ),
    )
}

fn tail_estimation() -> Outcome {
    let x = normalize(&series(symmetric_pareto(50_000, 3.0, GENERATION_SEED).unwrap())).unwrap();
    let fit = tail_exponent(&empirical_ccdf(&x).unwrap(), mfdfa::stats::DEFAULT_TAIL_FRACTION).unwrap();
    outcome(
        (ZETA_RANGE.0..=ZETA_RANGE.1).contains(&fit.zeta),
        format!("zeta = {:.4} +/- {:.4} (range {:?}); Hill {:.4}", fit.zeta, fit.zeta_err, ZETA_RANGE, fit.hill.zeta),
    )
}

fn aaft_contract() -> Outcome {
    let mut bits_equal = true;
    let mut worst: f64 = 0.0;
    let inputs = [
        Correlation::Exponential { crossover: 10.0 },
        Correlation::Exponential { crossover: 3.0 },
        Correlation::PowerLaw { beta: 0.5 },
    ];
    for (k, corr) in inputs.into_iter().enumerate() {
        let x = series(correlated_noise(8192, corr, GENERATION_SEED + k as u64).unwrap());
        let s = aaft(&x, &mut RngStream::new(SHUFFLE_SEED)).unwrap();
        let sorted = |v: &[f64]| {
            let mut v: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            v.sort_unstable();
            v
        };
        bits_equal &= sorted(x.values()) == sorted(s.values());
        let c0 = autocorrelation(&normalize(&x).unwrap(), 20).unwrap();
        let c1 = autocorrelation(&normalize(&s).unwrap(), 20).unwrap();
        worst = worst.max(c0.c.iter().zip(&c1.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    outcome(
        bits_equal && worst < ACF_TOL,
        format!("sorted values bit-equal: {bits_equal}; max |dC(s)| for s <= 20 = {worst:.4} (< {ACF_TOL})"),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    let out = tmp.path().join("out");
    let bin = env!("CARGO_BIN_EXE_mfdfa");
    let sh = |args: &[&str]| {
        let st = Command::new(bin).args(args).env("RUST_LOG", "off").output().unwrap();
        assert!(st.status.code().is_some_and(|c| c <= 1), "{args:?}: {}", String::from_utf8_lossy(&st.stderr));
    };
    std::fs::create_dir_all(&input).unwrap();
    let p = |x: &Path| x.to_str().unwrap().to_string();
    sh(&["synth", "gbm", "-o", &p(&input.join("cascade.csv"))]);
    sh(&["synth", "white", "-n", "4000", "--scale", "0.01", "-o", &p(&input.join("noise.csv"))]);
    let mut runs = Vec::new();
    for jobs in ["1", "1", "8"] {
        let _ = std::fs::remove_dir_all(&out);
        sh(&["pipeline", "-i", &p(&input), "--output-dir", &p(&out), "--seed", "0", "--jobs", jobs]);
        runs.push(snapshot(&out));
    }
    let files = runs[0].len();
    let rerun = runs[0] == runs[1];
    let parallel = runs[0] == runs[2];
    outcome(
        rerun && parallel && files == 38,
        format!("{files} files; rerun identical: {rerun}; --jobs 8 identical to --jobs 1: {parallel}"),
    )
}

fn finite_difference() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, b) in [(0.6, 0.9), (0.575, 0.904), (0.640, 0.816), (0.3, 0.95)] {
        let p = GbmParams::new(a, b).unwrap();
        let q: Vec<f64> = (-10_000..=10_000).map(|i| i as f64 * 0.001).collect();
        let tau = TauSpectrum { tau: q.iter().map(|&q| gbm_tau(q, &p)).collect(), tau_err: vec![0.0; q.len()], q };
        let ss = singularity_spectrum(&tau).unwrap();
        let n = ss.points.len();
        for pt in &ss.points[1..n - 1] {
            worst = worst.max((pt.alpha - gbm_alpha(pt.q, &p)).abs());
        }
    }
    outcome(
        worst <= FD_TOL,
        format!("max |alpha_fd - alpha| on q in [-10, 10], dq = 0.001: {worst:.2e} (tol {FD_TOL})"),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("GBM roundtrip", gbm_roundtrip),
        ("tabulated cascade widths", table_arithmetic),
        ("monofractal control", monofractal_control),
        ("bifractal oracle", bifractal_oracle),
        ("multifractality source", source_diagnosis),
        ("exactness invariants", exactness),
        ("tail estimation", tail_estimation),
        ("AAFT contract", aaft_contract),
        ("reproducibility", reproducibility),
        ("finite difference vs analytic", finite_difference),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
