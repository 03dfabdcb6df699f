use mfdfa::engine::{fluctuation_surface, MfdfaConfig};
use mfdfa::gbm::{fit_gbm, gbm_h, FitOptions, GbmParams};
use mfdfa::series::ReturnSeries;
use mfdfa::spectra::{hurst_spectrum, FitRange, HurstSpectrum};
use mfdfa::synth::white_noise;

fn hurst<T: mfdfa::Scalar>(values: Vec<T>) -> HurstSpectrum<T> {
    let n = values.len();
    let x = ReturnSeries::undated("w", values).unwrap();
    let surf = fluctuation_surface(&x, &MfdfaConfig::for_length(n).unwrap()).unwrap();
    hurst_spectrum(&surf, FitRange::default_for_length(n)).unwrap()
}

#[test]
fn f32_pipeline_tracks_f64() {
    let h64 = hurst::<f64>(white_noise(4096, 3));
    let h32 = hurst::<f32>(white_noise(4096, 3));
    for (a, b) in h64.h.iter().zip(&h32.h) {
        assert!((a - *b as f64).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn f32_gbm_fit() {
    let truth = GbmParams::new(0.6f32, 0.85).unwrap();
    let q: Vec<f32> = (-20..=20).map(|k| k as f32 * 0.5).collect();
    let spectrum = HurstSpectrum {
        h: q.iter().map(|&x| gbm_h(x, &truth)).collect(),
        h_err: vec![0.01; q.len()],
        r2: vec![1.0; q.len()],
        n_scales: vec![10; q.len()],
        fit_range: FitRange::new(50, 800).unwrap(),
        q,
    };
    let fit = fit_gbm(&spectrum, FitOptions::default()).unwrap();
    assert!((fit.params.a() - 0.6).abs() < 1e-3 && (fit.params.b() - 0.85).abs() < 1e-3, "{:?}", fit.params);
}
