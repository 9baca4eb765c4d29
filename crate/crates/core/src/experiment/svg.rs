//! A minimal static line chart.

use std::fmt::Write as _;
use std::path::Path;

use super::runner::ExperimentResult;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

/// Renders `(x, y)` series on shared axes. `y` is clamped to `[y_min, y_max]`.
pub fn line_chart(series: &[Vec<(f64, f64)>], x_max: f64, y_min: f64, y_max: f64, y_label: &str) -> String {
    let sx = |x: f64| MARGIN + (x / x_max.max(f64::MIN_POSITIVE)) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| {
        let t = ((y - y_min) / (y_max - y_min)).clamp(0.0, 1.0);
        HEIGHT - MARGIN - t * (HEIGHT - 2.0 * MARGIN)
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (sx(0.0), sx(x_max), sy(y_min), sy(y_max));
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let v = y_min + (y_max - y_min) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, x0 - 4.0, sy(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{x_max}</text>"#, x1, y0 + 16.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">time</text>"#, (x0 + x1) / 2.0, y0 + 16.0);
    let _ = writeln!(s, r#"<text x="12" y="{:.1}" transform="rotate(-90 12 {:.1})">{y_label}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
    for (i, line) in series.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, &(x, y)) in line.iter().enumerate() {
            let _ = write!(d, "{}{:.1},{:.1} ", if k == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#, d.trim_end(), PALETTE[i % PALETTE.len()]);
    }
    s.push_str("</svg>\n");
    s
}

/// Mean gain across replicates against time, one line per point.
pub fn write_gain_chart(path: &Path, result: &ExperimentResult) -> Result<()> {
    let series: Vec<Vec<(f64, f64)>> = result
        .outcomes
        .iter()
        .map(|reps| {
            let done: Vec<_> = reps.iter().filter(|o| o.error.is_none()).collect();
            let len = done.iter().map(|o| o.records.len()).min().unwrap_or(0);
            (0..len)
                .map(|k| {
                    let mean = done.iter().map(|o| o.records[k].gain).sum::<f64>() / done.len() as f64;
                    (done[0].records[k].time, mean)
                })
                .collect()
        })
        .collect();
    let svg = line_chart(&series, result.config.duration, -0.1, 1.0, "gain");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_path_per_series() {
        let svg = line_chart(&[vec![(0.0, 0.0), (1.0, 0.5)], vec![(0.0, 1.0), (1.0, 2.0)]], 1.0, 0.0, 1.0, "g");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-width").count(), 2);
        assert!(svg.contains("M48.0,352.0 L592.0,200.0"));
    }
}
