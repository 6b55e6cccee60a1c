//! Static SVG line plots: median across trials with an interquartile band.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::table::ResultTable;
use super::HarnessError;

/// Per-index summary across trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub x: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub count: usize,
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Median and quartiles at every index, over the trials reporting it.
pub fn summarize(series: &BTreeMap<usize, Vec<(u64, f64)>>) -> Vec<BandPoint> {
    let mut by_index: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for points in series.values() {
        for &(i, v) in points {
            if v.is_finite() {
                by_index.entry(i).or_default().push(v);
            }
        }
    }
    by_index
        .into_iter()
        .map(|(i, mut v)| {
            v.sort_by(f64::total_cmp);
            BandPoint {
                x: i as f64,
                median: quantile(&v, 0.5),
                q25: quantile(&v, 0.25),
                q75: quantile(&v, 0.75),
                count: v.len(),
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` on `ln x` over points with `x` in `window`
/// and both coordinates positive; `None` with fewer than two such points.
pub fn fit_loglog_slope(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .filter(|(x, _)| window.map_or(true, |(lo, hi)| *x >= lo && *x <= hi))
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<BandPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    pub log_x: bool,
    pub log_y: bool,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if log && v <= 0.0 {
                continue;
            }
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 {
            // constant data: pad so the line sits mid-plot
            let pad = if lo.abs() > 1e-12 { lo.abs() * 0.1 } else { 1.0 };
            lo -= pad;
            hi += pad;
        }
        Some(Scale { lo, hi, log })
    }

    fn map(&self, v: f64, from: f64, to: f64) -> Option<f64> {
        if self.log && v <= 0.0 {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some(from + (v - self.lo) / (self.hi - self.lo) * (to - from))
    }

    fn tick_label(&self, frac: f64) -> String {
        let v = self.lo + frac * (self.hi - self.lo);
        if self.log {
            format!("{:.3e}", 10f64.powf(v))
        } else {
            format!("{v:.3e}")
        }
    }
}

/// Renders the curves as a standalone SVG document.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, curves: &[Curve], axes: Axes, notes: &[String]) -> String {
    let all = || curves.iter().flat_map(|c| c.points.iter());
    let xs = Scale::new(all().map(|p| p.x), axes.log_x);
    let ys = Scale::new(all().flat_map(|p| [p.median, p.q25, p.q75]), axes.log_y);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN / 2.0, HEIGHT - MARGIN, MARGIN / 1.5);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    if let (Some(xs), Some(ys)) = (&xs, &ys) {
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let px = x0 + f * (x1 - x0);
            let py = y0 + f * (y1 - y0);
            let _ = writeln!(svg, r#"<text x="{px}" y="{}" text-anchor="middle" font-size="10">{}</text>"#, y0 + 14.0, xs.tick_label(f));
            let _ = writeln!(svg, r#"<text x="{}" y="{py}" text-anchor="end" font-size="10">{}</text>"#, x0 - 4.0, ys.tick_label(f));
        }
        for (n, c) in curves.iter().enumerate() {
            let color = PALETTE[n % PALETTE.len()];
            let pts: Vec<(f64, f64, f64, f64)> = c
                .points
                .iter()
                .filter_map(|p| {
                    Some((
                        xs.map(p.x, x0, x1)?,
                        ys.map(p.median, y0, y1)?,
                        ys.map(p.q25, y0, y1)?,
                        ys.map(p.q75, y0, y1)?,
                    ))
                })
                .collect();
            if pts.is_empty() {
                continue;
            }
            if c.points.iter().any(|p| p.count > 1 && p.q75 > p.q25) {
                let mut d = String::new();
                for (i, p) in pts.iter().enumerate() {
                    let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, p.0, p.3);
                }
                for p in pts.iter().rev() {
                    let _ = write!(d, "L{:.2},{:.2} ", p.0, p.2);
                }
                let _ = writeln!(svg, r#"<path class="band" d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, d.trim_end());
            }
            let mut d = String::new();
            for (i, p) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, p.0, p.1);
            }
            let _ = writeln!(svg, r#"<path class="median" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                x0 + 12.0,
                y1 + 16.0 + 14.0 * n as f64,
                escape(&c.label)
            );
        }
    }
    for (n, note) in notes.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="note" x="{}" y="{}" text-anchor="end">{}</text>"#,
            x1,
            y1 + 16.0 + 14.0 * n as f64,
            escape(note)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Metric plotted against the exploration index on log-log axes.
pub const ERROR_METRIC: &str = "l1_error_support";
/// Metric plotted against the round index.
pub const REGRET_METRIC: &str = "regret";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Fitted slope of the median error curve per algorithm.
    pub slopes: BTreeMap<String, f64>,
}

/// Writes `l1_error.svg` and `regret.svg` into `out_dir`; a metric absent
/// from the table produces a warning instead of a file.
pub fn emit_plots(table: &ResultTable, out_dir: &Path, window: Option<(f64, f64)>) -> Result<PlotReport, HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::Table("empty table".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(HarnessError::Io)?;
    let mut report = PlotReport::default();
    let specs = [
        (ERROR_METRIC, "l1_error.svg", "estimation error on the support", "exploration round s", "||w_hat - w*||_1 on S", Axes { log_x: true, log_y: true }),
        (REGRET_METRIC, "regret.svg", "cumulative regret", "round t", "regret", Axes { log_x: false, log_y: false }),
    ];
    for (metric, file, title, xl, yl, axes) in specs {
        let mut curves = Vec::new();
        let mut notes = Vec::new();
        for alg in table.algorithms() {
            let series = table.series(&alg, metric);
            if series.is_empty() {
                continue;
            }
            let points = summarize(&series);
            if metric == ERROR_METRIC {
                let med: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.median)).collect();
                if let Some(slope) = fit_loglog_slope(&med, window) {
                    notes.push(format!("{alg}: slope = {slope:.4}"));
                    report.slopes.insert(alg.clone(), slope);
                }
            }
            curves.push(Curve { label: alg, points });
        }
        if curves.is_empty() {
            report.warnings.push(format!("no `{metric}` rows; skipped {file}"));
            continue;
        }
        let path = out_dir.join(file);
        std::fs::write(&path, render_svg(title, xl, yl, &curves, axes, &notes)).map_err(HarnessError::Io)?;
        report.files.push(path);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn power_law_slope() {
        let pts: Vec<(f64, f64)> = (1..=50).map(|s| (s as f64, 3.0 * (s as f64).powf(-0.5))).collect();
        assert!((fit_loglog_slope(&pts, None).unwrap() + 0.5).abs() < 1e-12);
        assert!((fit_loglog_slope(&pts, Some((10.0, 20.0))).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_loglog_slope(&pts[..1], None), None);
    }

    #[test]
    fn single_trial_has_no_band() {
        let mut series = BTreeMap::new();
        series.insert(0, vec![(1, 1.0), (2, 0.5), (3, 0.25)]);
        let curve = Curve { label: "a".into(), points: summarize(&series) };
        let svg = render_svg("t", "x", "y", &[curve], Axes { log_x: true, log_y: true }, &[]);
        assert!(!svg.contains("class=\"band\""));
        assert!(svg.contains("class=\"median\""));
    }

    #[test]
    fn constant_series_is_horizontal() {
        let mut series = BTreeMap::new();
        series.insert(0, vec![(1, 0.3), (2, 0.3), (5, 0.3)]);
        series.insert(1, vec![(1, 0.3), (2, 0.3), (5, 0.3)]);
        let curve = Curve { label: "a".into(), points: summarize(&series) };
        let svg = render_svg("t", "x", "y", &[curve], Axes { log_x: false, log_y: true }, &[]);
        let line = svg.lines().find(|l| l.contains("class=\"median\"")).unwrap();
        let d = line.split("d=\"").nth(1).unwrap().split('"').next().unwrap();
        let ys: Vec<&str> = d.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]), "{d}");
        assert!(!svg.contains("class=\"band\""));
    }
}
