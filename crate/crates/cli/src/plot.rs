//! Plot data as TSV, one file per series, period, variant and quantity,
//! plus optional SVG line charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mfdfa::gbm::{gbm_alpha, gbm_f, gbm_h, gbm_tau, GbmParams};
use mfdfa::stats::ccdf_to_tsv;
use mfdfa::tsv::{render, sci10, short};

use crate::report::{AnalysisReport, PlotData};
use crate::CliError;

pub const QUANTITIES: [&str; 6] = ["ccdf", "acf", "fluct", "hurst", "tau", "falpha"];

/// Keeps `[A-Za-z0-9._-]` and replaces everything else with `-`.
pub fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' }).collect()
}

pub fn file_stem(series: &str, period: &str, variant: &str, quantity: &str) -> String {
    format!("{}_{}_{}_{}", slug(series), slug(period), variant, quantity)
}

/// Writes the six TSV files for every completed variant. Variants that
/// failed produce no files. Returns the paths in write order.
pub fn emit_plot_data(report: &AnalysisReport, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in &report.series {
        for p in &s.periods {
            let Some(variants) = &p.variants else { continue };
            for (variant, outcome) in variants.iter() {
                let Some(r) = outcome.report() else { continue };
                for quantity in QUANTITIES {
                    let stem = file_stem(&s.name, &p.name, variant, quantity);
                    let path = dir.join(format!("{stem}.tsv"));
                    std::fs::write(&path, table(&r.plot, quantity))?;
                    written.push(path);
                    if svg {
                        if let Some(chart) = chart(&r.plot, quantity, &stem) {
                            let path = dir.join(format!("{stem}.svg"));
                            std::fs::write(&path, chart)?;
                            written.push(path);
                        }
                    }
                }
            }
        }
    }
    Ok(written)
}

fn table(d: &PlotData, quantity: &str) -> String {
    match quantity {
        "ccdf" => ccdf_to_tsv(&d.ccdf),
        "acf" => d.acf.as_ref().map_or_else(|| render(&header(&["s", "C"]), []), |a| a.to_tsv()),
        "fluct" => d.surface.as_ref().map_or_else(|| render(&header(&["s"]), []), |s| s.to_tsv()),
        "hurst" => hurst_table(d),
        "tau" => tau_table(d),
        "falpha" => falpha_table(d),
        _ => unreachable!("unknown quantity {quantity}"),
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn hurst_table(d: &PlotData) -> String {
    let Some(h) = &d.hurst else { return render(&header(&["q", "h", "h_err", "r2"]), []) };
    let Some(g) = d.gbm else { return h.to_tsv() };
    let rows = (0..h.len())
        .map(|i| vec![short(h.q[i]), sci10(h.h[i]), sci10(h.h_err[i]), sci10(h.r2[i]), sci10(gbm_h(h.q[i], &g))]);
    render(&header(&["q", "h", "h_err", "r2", "h_gbm"]), rows)
}

fn tau_table(d: &PlotData) -> String {
    let Some(t) = &d.tau else { return render(&header(&["q", "tau", "tau_err"]), []) };
    let Some(g) = d.gbm else { return t.to_tsv() };
    let rows =
        (0..t.q.len()).map(|i| vec![short(t.q[i]), sci10(t.tau[i]), sci10(t.tau_err[i]), sci10(gbm_tau(t.q[i], &g))]);
    render(&header(&["q", "tau", "tau_err", "tau_gbm"]), rows)
}

fn falpha_table(d: &PlotData) -> String {
    let Some(s) = &d.singularity else { return render(&header(&["q", "alpha", "f"]), []) };
    let Some(g) = d.gbm else { return s.to_tsv() };
    let rows = s
        .points
        .iter()
        .map(|p| vec![short(p.q), sci10(p.alpha), sci10(p.f), sci10(gbm_alpha(p.q, &g)), sci10(gbm_f(p.q, &g))]);
    render(&header(&["q", "alpha", "f", "alpha_gbm", "f_gbm"]), rows)
}

struct Line {
    points: Vec<(f64, f64)>,
    color: &'static str,
}

fn lines_for(d: &PlotData, quantity: &str) -> (Vec<Line>, bool) {
    let gbm: Option<GbmParams<f64>> = d.gbm;
    let mut lines = Vec::new();
    let mut loglog = false;
    match quantity {
        "ccdf" => {
            loglog = true;
            let pts = d
                .ccdf
                .iter()
                .filter(|p| p.value > 0.0 && p.probability > 0.0)
                .map(|p| (p.value, p.probability))
                .collect();
            lines.push(Line { points: pts, color: "black" });
        }
        "acf" => {
            if let Some(a) = &d.acf {
                lines.push(Line {
                    points: a.lags.iter().zip(&a.c).map(|(&s, &c)| (s as f64, c)).collect(),
                    color: "black",
                });
            }
        }
        "fluct" => {
            loglog = true;
            if let Some(s) = &d.surface {
                let colors = ["#1f77b4", "#d62728"];
                let nq = s.q_grid().len();
                // Extreme and central rows keep the chart readable.
                let mut rows: Vec<usize> = vec![0, nq / 4, nq / 2, 3 * nq / 4, nq.saturating_sub(1)];
                rows.dedup();
                for (k, qi) in rows.into_iter().enumerate() {
                    let pts = s
                        .scale_grid()
                        .iter()
                        .zip(s.row(qi))
                        .filter_map(|(&sc, v)| v.filter(|v| *v > 0.0).map(|v| (sc as f64, v)))
                        .collect();
                    lines.push(Line { points: pts, color: colors[k % 2] });
                }
            }
        }
        "hurst" => {
            if let Some(h) = &d.hurst {
                lines.push(Line { points: h.q.iter().copied().zip(h.h.iter().copied()).collect(), color: "black" });
                if let Some(g) = gbm {
                    lines.push(Line { points: h.q.iter().map(|&q| (q, gbm_h(q, &g))).collect(), color: "#d62728" });
                }
            }
        }
        "tau" => {
            if let Some(t) = &d.tau {
                lines.push(Line { points: t.q.iter().copied().zip(t.tau.iter().copied()).collect(), color: "black" });
                if let Some(g) = gbm {
                    lines.push(Line { points: t.q.iter().map(|&q| (q, gbm_tau(q, &g))).collect(), color: "#d62728" });
                }
            }
        }
        "falpha" => {
            if let Some(s) = &d.singularity {
                lines.push(Line { points: s.points.iter().map(|p| (p.alpha, p.f)).collect(), color: "black" });
                if let Some(g) = gbm {
                    let pts = s.points.iter().map(|p| (gbm_alpha(p.q, &g), gbm_f(p.q, &g))).collect();
                    lines.push(Line { points: pts, color: "#d62728" });
                }
            }
        }
        _ => {}
    }
    if loglog {
        for l in &mut lines {
            l.points = l.points.iter().map(|&(x, y)| (x.log10(), y.log10())).collect();
        }
    }
    for l in &mut lines {
        l.points.retain(|(x, y)| x.is_finite() && y.is_finite());
    }
    lines.retain(|l| !l.points.is_empty());
    (lines, loglog)
}

/// A bare SVG line chart; log-log axes for the CCDF and F_q(s).
fn chart(d: &PlotData, quantity: &str, title: &str) -> Option<String> {
    let (lines, loglog) = lines_for(d, quantity);
    let all = lines.iter().flat_map(|l| l.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let (w, h, m) = (480.0, 360.0, 40.0);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<path d="M{m},{m} V{} H{}" fill="none" stroke="gray"/>"#, h - m, w - m);
    let _ = writeln!(
        out,
        r#"<text x="{m}" y="20" font-family="sans-serif" font-size="12">{title}{}</text>"#,
        if loglog { " (log10-log10)" } else { "" }
    );
    let _ = writeln!(
        out,
        r#"<text x="{m}" y="{}" font-family="sans-serif" font-size="10">x {:.3} .. {:.3}, y {:.3} .. {:.3}</text>"#,
        h - 10.0,
        x0,
        x1,
        y0,
        y1
    );
    for l in &lines {
        let mut d = String::new();
        for (i, &(x, y)) in l.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(x), py(y));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.2"/>"#, l.color);
    }
    out.push_str("</svg>\n");
    Some(out)
}
