//! Metric-versus-steps line charts across seeds, written as SVG.
//!
//! Runs are grouped by strategy tag. At every iteration where at least one
//! run reports the metric, the runs that do are aggregated either as a mean
//! with a standard-error band or as a median with an interquartile band. The
//! x position is the mean `env_steps` of those runs.

use std::fmt::Write as _;

use ued_core::strategies::StrategyKind;

use crate::error::{LabError, Result};
use crate::metrics::{MetricsTable, NUMERIC_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Mean line, band of one standard error either side.
    #[default]
    Mean,
    /// Median line, band from the first to the third quartile.
    Median,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "median" => Ok(Aggregation::Median),
            other => Err(format!("unknown aggregation `{other}` (expected mean or median)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub iteration: u64,
    pub x: f64,
    pub center: f64,
    pub low: f64,
    pub high: f64,
    /// Number of runs contributing.
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub strategy: StrategyKind,
    pub runs: usize,
    pub points: Vec<SeriesPoint>,
}

impl Series {
    pub fn has_band(&self) -> bool {
        self.points.iter().any(|p| p.runs >= 2)
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Sample mean and its standard error (0 for a single value).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn check_metric(metric: &str) -> Result<()> {
    if NUMERIC_COLUMNS.contains(&metric) {
        Ok(())
    } else {
        Err(LabError::Config(format!(
            "--metric: `{metric}` is not a numeric column (expected one of {})",
            NUMERIC_COLUMNS.join(", ")
        )))
    }
}

/// One series per strategy, in the fixed strategy order.
pub fn aggregate(tables: &[MetricsTable], metric: &str, agg: Aggregation) -> Result<Vec<Series>> {
    check_metric(metric)?;
    let mut out = Vec::new();
    for kind in StrategyKind::ALL {
        // One run per (file, seed) pair holding this strategy.
        let mut runs: Vec<Vec<(u64, f64, f64)>> = Vec::new();
        for table in tables {
            let mut seeds: Vec<u64> = table
                .rows
                .iter()
                .filter(|r| r.strategy == kind)
                .map(|r| r.seed)
                .collect();
            seeds.sort_unstable();
            seeds.dedup();
            for seed in seeds {
                let run = table
                    .rows
                    .iter()
                    .filter(|r| r.strategy == kind && r.seed == seed)
                    .filter_map(|r| {
                        let v = r.get(metric)?;
                        Some((r.get("iteration")? as u64, r.get("env_steps")?, v))
                    })
                    .collect();
                runs.push(run);
            }
        }
        if runs.is_empty() {
            continue;
        }
        let mut iterations: Vec<u64> = runs.iter().flatten().map(|p| p.0).collect();
        iterations.sort_unstable();
        iterations.dedup();
        let points = iterations
            .into_iter()
            .map(|it| {
                let at: Vec<(f64, f64)> = runs
                    .iter()
                    .filter_map(|r| r.iter().find(|p| p.0 == it).map(|p| (p.1, p.2)))
                    .collect();
                let x = at.iter().map(|p| p.0).sum::<f64>() / at.len() as f64;
                let mut values: Vec<f64> = at.iter().map(|p| p.1).collect();
                let (center, low, high) = match agg {
                    Aggregation::Mean => {
                        let (m, se) = mean_and_std_error(&values);
                        (m, m - se, m + se)
                    }
                    Aggregation::Median => {
                        values.sort_by(f64::total_cmp);
                        (quantile(&values, 0.5), quantile(&values, 0.25), quantile(&values, 0.75))
                    }
                };
                SeriesPoint {
                    iteration: it,
                    x,
                    center,
                    low,
                    high,
                    runs: at.len(),
                }
            })
            .collect();
        out.push(Series {
            strategy: kind,
            runs: runs.len(),
            points,
        });
    }
    Ok(out)
}

fn color(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::Divsp => "#d62728",
        StrategyKind::Dr => "#1f77b4",
        StrategyKind::Plr => "#2ca02c",
        StrategyKind::Minimax => "#9467bd",
        StrategyKind::Paired => "#ff7f0e",
    }
}

const PANEL_W: f64 = 720.0;
const PANEL_H: f64 = 340.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

struct Frame {
    top: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (PANEL_W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + PANEL_H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (PANEL_H - TOP - BOTTOM)
    }
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.low);
        y1 = y1.max(p.high);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    x0 = x0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    (x0, x1, y0 - pad, y1 + pad)
}

fn panel(svg: &mut String, index: usize, metric: &str, series: &[Series], agg: Aggregation) {
    let (x0, x1, y0, y1) = bounds(series);
    let f = Frame {
        top: index as f64 * PANEL_H,
        x0,
        x1,
        y0,
        y1,
    };
    let band_label = match agg {
        Aggregation::Mean => "mean, band = 1 std. error",
        Aggregation::Median => "median, band = interquartile range",
    };
    let _ = writeln!(svg, r#"<g class="panel" data-metric="{metric}">"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{metric} ({band_label})</text>"#,
        LEFT + (PANEL_W - LEFT - RIGHT) / 2.0,
        f.top + 22.0
    );
    let (bx, by) = (f.px(x0), f.py(y0));
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M{:.1},{:.1} L{bx:.1},{by:.1} L{:.1},{by:.1}" stroke="black" fill="none"/>"#,
        bx,
        f.py(y1),
        f.px(x1)
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            f.px(xv),
            by + 14.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            bx - 4.0,
            f.py(yv) + 3.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">env_steps</text>"#,
        LEFT + (PANEL_W - LEFT - RIGHT) / 2.0,
        by + 32.0
    );
    for (k, s) in series.iter().enumerate() {
        let c = color(s.strategy);
        let tag = s.strategy.tag();
        if s.has_band() {
            let upper = s.points.iter().map(|p| format!("{:.2},{:.2}", f.px(p.x), f.py(p.high)));
            let lower = s
                .points
                .iter()
                .rev()
                .map(|p| format!("{:.2},{:.2}", f.px(p.x), f.py(p.low)));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                svg,
                r#"<polygon class="band" data-strategy="{tag}" points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", f.px(p.x), f.py(p.center)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="line" data-strategy="{tag}" points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = f.top + TOP + 16.0 * k as f64;
        let lx = PANEL_W - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="11">{tag} (n={})</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            s.runs
        );
    }
    let _ = writeln!(svg, "</g>");
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

/// One stacked panel per metric.
pub fn render_svg(panels: &[(String, Vec<Series>)], agg: Aggregation) -> String {
    let height = PANEL_H * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (metric, series)) in panels.iter().enumerate() {
        panel(&mut svg, i, metric, series, agg);
    }
    svg.push_str("</svg>\n");
    svg
}
