//! Line-plus-error-bar panels in SVG 1.1 with a logarithmic x axis.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::EstimatorVariant;
use crate::local::LocalDimResult;
use crate::sweep::SweepResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    /// `None` renders as a gap.
    pub y: Option<f64>,
    /// Half-length of the error bar.
    pub err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<PlotPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub trait Plottable {
    fn plot_data(&self) -> PlotData;
}

fn mean_and_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

/// The swept axis goes on x. When both axes vary, each value of the other
/// axis gets its own line.
impl Plottable for SweepResult {
    fn plot_data(&self) -> PlotData {
        let x_is_p = self.grid_p.len() > 1 || self.grid_q.len() <= 1;
        let (x_name, other_name) = if x_is_p { ("P", "Q") } else { ("Q", "P") };
        let other_varies = if x_is_p { self.grid_q.len() > 1 } else { self.grid_p.len() > 1 };

        // (variant order, other-axis value) -> x -> valid values
        let mut groups: BTreeMap<(usize, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for r in &self.records {
            let Some(vi) = self.variants.iter().position(|v| *v == r.estimate.variant) else {
                continue;
            };
            let (x, other) = if x_is_p { (r.p, r.q) } else { (r.q, r.p) };
            let cell = groups.entry((vi, other)).or_default().entry(x).or_default();
            if let Some(v) = r.estimate.value {
                cell.push(v);
            }
        }
        let series = groups
            .into_iter()
            .map(|((vi, other), cells)| {
                let mut label = variant_label(self.variants[vi]);
                if other_varies {
                    let _ = write!(label, " {other_name}={other}");
                }
                let points = cells
                    .into_iter()
                    .map(|(x, values)| {
                        let (y, err) = mean_and_sd(&values);
                        PlotPoint { x: x as f64, y, err }
                    })
                    .collect();
                Series { label, points }
            })
            .collect();
        PlotData {
            title: format!("Dimensionality vs {x_name}"),
            x_label: x_name.to_string(),
            y_label: "dimensionality".into(),
            series,
        }
    }
}

impl Plottable for [LocalDimResult] {
    fn plot_data(&self) -> PlotData {
        let mut order: Vec<EstimatorVariant> = Vec::new();
        for r in self {
            if !order.contains(&r.variant) {
                order.push(r.variant);
            }
        }
        let series = order
            .iter()
            .map(|&variant| {
                let mut points: Vec<PlotPoint> = self
                    .iter()
                    .filter(|r| r.variant == variant)
                    .map(|r| PlotPoint {
                        x: r.radius,
                        y: r.mean_gamma,
                        err: r.std_gamma(),
                    })
                    .collect();
                points.sort_by(|a, b| a.x.total_cmp(&b.x));
                Series {
                    label: variant_label(variant),
                    points,
                }
            })
            .collect();
        PlotData {
            title: "Local dimensionality vs radius".into(),
            x_label: "radius".into(),
            y_label: "mean local dimensionality".into(),
            series,
        }
    }
}

impl Plottable for Vec<LocalDimResult> {
    fn plot_data(&self) -> PlotData {
        self.as_slice().plot_data()
    }
}

fn variant_label(v: EstimatorVariant) -> String {
    format!("{} ({})", v.correction, v.centering)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Tick positions at 1, 2, 5 times powers of ten, or only the powers when
/// the range spans several decades.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    let mantissas: &[f64] = if b - a > 3 { &[1.0] } else { &[1.0, 2.0, 5.0] };
    (a..=b)
        .flat_map(|e| mantissas.iter().map(move |m| m * 10f64.powi(e)))
        .filter(|t| *t >= lo * (1.0 - 1e-9) && *t <= hi * (1.0 + 1e-9))
        .collect()
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn flush_run(run: &mut Vec<(f64, f64)>, svg: &mut String) {
    if run.len() > 1 {
        let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" points="{}" fill="none" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    run.clear();
}

pub fn render_svg<P: Plottable + ?Sized>(result: &P) -> Result<String> {
    let data = result.plot_data();
    let valid: Vec<&PlotPoint> = data
        .series
        .iter()
        .flat_map(|s| &s.points)
        .filter(|p| p.y.is_some() && p.x > 0.0 && p.x.is_finite())
        .collect();
    if valid.is_empty() {
        return Err(Error::NoValidRecords);
    }

    let (mut x_lo, mut x_hi) = valid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    if x_lo == x_hi {
        x_lo /= 2.0;
        x_hi *= 2.0;
    }
    let (mut y_lo, mut y_hi) = valid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let (y, e) = (p.y.unwrap(), p.err.unwrap_or(0.0));
        (lo.min(y - e), hi.max(y + e))
    });
    let pad = if y_hi > y_lo { 0.05 * (y_hi - y_lo) } else { 0.5f64.max(0.05 * y_hi.abs()) };
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let (lx_lo, lx_hi) = (x_lo.log10(), x_hi.log10());
    let sx = |x: f64| LEFT + (x.log10() - lx_lo) / (lx_hi - lx_lo) * plot_w;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&data.title)
    );

    // axes, ticks and grid
    let _ = writeln!(
        svg,
        r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for t in log_ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 16.0,
            tick_label(t)
        );
    }
    for t in linear_ticks(y_lo, y_hi) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(&data.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&data.y_label)
    );

    for (k, series) in data.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series-group" stroke="{color}" fill="{color}">"#);
        // contiguous runs of valid points become one polyline each
        let mut run: Vec<(f64, f64)> = Vec::new();
        for p in &series.points {
            match p.y {
                Some(y) if p.x > 0.0 && p.x.is_finite() => run.push((sx(p.x), sy(y))),
                _ => flush_run(&mut run, &mut svg),
            }
        }
        flush_run(&mut run, &mut svg);
        for p in series.points.iter().filter(|p| p.x > 0.0 && p.x.is_finite()) {
            let Some(y) = p.y else { continue };
            let (x, cy) = (sx(p.x), sy(y));
            if let Some(e) = p.err.filter(|e| *e > 0.0) {
                let _ = writeln!(
                    svg,
                    r#"<line class="errorbar" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                    sy(y - e),
                    sy(y + e)
                );
            }
            let _ = writeln!(svg, r#"<circle class="marker" cx="{x:.2}" cy="{cy:.2}" r="3"/>"#);
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke-width="2"/><text class="legend" x="{:.2}" y="{:.2}" stroke="none" fill="black">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&series.label)
        );
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

pub fn emit_plot<P: Plottable + ?Sized>(result: &P, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(result)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_ticks_cover_range() {
        assert_eq!(log_ticks(25.0, 1600.0), vec![50.0, 100.0, 200.0, 500.0, 1000.0]);
        assert_eq!(log_ticks(1.0, 1e6), vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6]);
    }

    #[test]
    fn linear_ticks_are_round() {
        assert_eq!(linear_ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn sd_needs_two_values() {
        assert_eq!(mean_and_sd(&[3.0]), (Some(3.0), None));
        assert_eq!(mean_and_sd(&[]), (None, None));
        let (m, s) = mean_and_sd(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
