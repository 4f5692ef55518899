//! Self-contained SVG line charts for the figure families: curve overlays,
//! confidence bands (dotted edges, solid center), phase planes with month
//! tags, MSE profiles, and change curves.
//!
//! Rendering is a thin layer over the CSV-serializable data; no timestamps
//! or other non-deterministic content is ever embedded.

use crate::bootstrap::ConfidenceBand;
use crate::change::ChangeCurve;
use crate::phase::{PhaseCurve, PhasePair};
use crate::smooth::MseProfile;
use crate::stats::GridFunction;

/// Block color convention: red/green/brown/yellow/blue by block count.
pub fn block_palette(n: usize) -> Vec<&'static str> {
    match n {
        0 => Vec::new(),
        1 => vec!["black"],
        2 => vec!["red", "blue"],
        3 => vec!["red", "green", "blue"],
        4 => vec!["red", "green", "brown", "blue"],
        5 => vec!["red", "green", "brown", "goldenrod", "blue"],
        _ => (0..n)
            .map(|i| {
                ["red", "green", "brown", "goldenrod", "blue", "purple", "teal"][i % 7]
            })
            .collect(),
    }
}

/// One plotted series.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub color: String,
    pub dashed: bool,
    /// Draw circles at the vertices instead of only the line.
    pub markers: bool,
    /// Suppress the legend entry (band edges share their center's entry).
    pub in_legend: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>, color: &str) -> Self {
        Series {
            label: label.into(),
            x,
            y,
            color: color.to_string(),
            dashed: false,
            markers: false,
            in_legend: true,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn with_markers(mut self) -> Self {
        self.markers = true;
        self
    }

    pub fn hidden_from_legend(mut self) -> Self {
        self.in_legend = false;
        self
    }
}

/// A text annotation in data coordinates.
#[derive(Debug, Clone)]
pub struct Annotation {
    pub x: f64,
    pub y: f64,
    pub text: String,
    pub color: String,
}

/// A complete figure: axes, optional legend, series, annotations.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub annotations: Vec<Annotation>,
}

impl LineChart {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        LineChart {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            annotations: Vec::new(),
        }
    }

    pub fn push(&mut self, series: Series) {
        self.series.push(series);
    }

    /// Render to a standalone SVG document.
    pub fn to_svg(&self, width: u32, height: u32) -> String {
        let (w, h) = (width as f64, height as f64);
        let (ml, mr, mt, mb) = (62.0, 16.0, 34.0, 46.0);
        let plot_w = (w - ml - mr).max(1.0);
        let plot_h = (h - mt - mb).max(1.0);

        let (x_min, x_max) = data_range(self.series.iter().flat_map(|s| s.x.iter().copied()));
        let (y_min, y_max) = data_range(self.series.iter().flat_map(|s| s.y.iter().copied()));
        let px = |x: f64| ml + (x - x_min) / (x_max - x_min) * plot_w;
        let py = |y: f64| mt + (y_max - y) / (y_max - y_min) * plot_h;

        let mut svg = format!(
            r#"<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        );
        svg.push_str(&format!(
            r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
        ));
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            w / 2.0,
            escape(&self.title)
        ));

        // Grid lines and ticks.
        for tx in nice_ticks(x_min, x_max, 8) {
            let x = px(tx);
            svg.push_str(&format!(
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd" stroke-width="1"/>"##,
                mt,
                mt + plot_h
            ));
            svg.push_str(&format!(
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
                mt + plot_h + 14.0,
                tick_label(tx)
            ));
        }
        for ty in nice_ticks(y_min, y_max, 6) {
            let y = py(ty);
            svg.push_str(&format!(
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="1"/>"##,
                ml,
                ml + plot_w
            ));
            svg.push_str(&format!(
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
                ml - 6.0,
                y + 3.5,
                tick_label(ty)
            ));
        }

        // Axes frame.
        svg.push_str(&format!(
            r#"<rect x="{ml:.1}" y="{mt:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black" stroke-width="1"/>"#
        ));
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            ml + plot_w / 2.0,
            h - 8.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            r#"<text x="14" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {:.1})">{}</text>"#,
            mt + plot_h / 2.0,
            mt + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // Series.
        for s in &self.series {
            if s.x.is_empty() {
                continue;
            }
            let points: Vec<String> = s
                .x
                .iter()
                .zip(&s.y)
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let dash = if s.dashed {
                r#" stroke-dasharray="2 4""#
            } else {
                ""
            };
            if points.len() > 1 {
                svg.push_str(&format!(
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.4"{dash} points="{}"/>"#,
                    escape(&s.color),
                    points.join(" ")
                ));
            }
            if s.markers || points.len() == 1 {
                for p in &points {
                    let mut it = p.split(',');
                    let (cx, cy) = (it.next().unwrap(), it.next().unwrap());
                    svg.push_str(&format!(
                        r#"<circle cx="{cx}" cy="{cy}" r="1.6" fill="{}"/>"#,
                        escape(&s.color)
                    ));
                }
            }
        }

        // Annotations.
        for a in &self.annotations {
            svg.push_str(&format!(
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="9" fill="{}">{}</text>"#,
                px(a.x),
                py(a.y),
                escape(&a.color),
                escape(&a.text)
            ));
        }

        // Legend.
        let mut slot = 0;
        for s in &self.series {
            if !s.in_legend || s.label.is_empty() {
                continue;
            }
            let y = mt + 10.0 + 14.0 * slot as f64;
            let x0 = ml + plot_w - 130.0;
            svg.push_str(&format!(
                r#"<line x1="{x0:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="2"/>"#,
                x0 + 18.0,
                escape(&s.color)
            ));
            svg.push_str(&format!(
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">{}</text>"#,
                x0 + 22.0,
                y + 3.5,
                escape(&s.label)
            ));
            slot += 1;
        }

        svg.push_str("</svg>");
        svg
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            min = min.min(v);
            max = max.max(v);
        }
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 1.0, max + 1.0);
    }
    let pad = (max - min) * 0.04;
    (min - pad, max + pad)
}

fn nice_ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    let range = max - min;
    if !range.is_finite() || range <= 0.0 {
        return vec![min];
    }
    let raw = range / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (min / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = start;
    while t <= max + step * 1e-9 {
        // Snap tiny float drift to zero.
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn tick_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

/// Overlay of grid functions, one color per function.
pub fn curves_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    functions: &[&GridFunction],
    colors: Option<&[&str]>,
) -> LineChart {
    let palette = match colors {
        Some(c) => c.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        None => block_palette(functions.len())
            .into_iter()
            .map(String::from)
            .collect(),
    };
    let mut chart = LineChart::new(title, x_label, y_label);
    for (i, f) in functions.iter().enumerate() {
        let color = palette.get(i).cloned().unwrap_or_else(|| "black".into());
        chart.push(Series::line(
            f.label(),
            f.grid().to_vec(),
            f.values().to_vec(),
            &color,
        ));
    }
    chart
}

/// Confidence bands: per block, dotted lower/upper edges and a solid center
/// line in the block color.
pub fn bands_chart(title: &str, bands: &[&ConfidenceBand]) -> LineChart {
    let palette = block_palette(bands.len());
    let mut chart = LineChart::new(title, "day of year", "area (million km^2)");
    for (band, color) in bands.iter().zip(palette) {
        let grid = band.grid().to_vec();
        chart.push(Series::line(
            band.label(),
            grid.clone(),
            band.center().to_vec(),
            color,
        ));
        chart.push(
            Series::line("", grid.clone(), band.lower().to_vec(), color)
                .dashed()
                .hidden_from_legend(),
        );
        chart.push(
            Series::line("", grid, band.upper().to_vec(), color)
                .dashed()
                .hidden_from_legend(),
        );
    }
    chart
}

/// Phase-plane overlay for one axis pair; month tags go on the last curve.
pub fn phase_chart(title: &str, curves: &[&PhaseCurve], pair: PhasePair) -> LineChart {
    let (x_label, y_label) = pair.axis_labels();
    let palette = block_palette(curves.len());
    let mut chart = LineChart::new(title, x_label, y_label);
    for (pc, color) in curves.iter().zip(&palette) {
        let (x, y) = pc.pair(pair);
        chart.push(Series::line(pc.label(), x.to_vec(), y.to_vec(), color));
    }
    if let (Some(last), Some(color)) = (curves.last(), palette.last()) {
        let (x, y) = last.pair(pair);
        for anchor in last.month_anchors() {
            chart.annotations.push(Annotation {
                x: x[anchor.index],
                y: y[anchor.index],
                text: anchor.label.to_string(),
                color: color.to_string(),
            });
        }
    }
    chart
}

/// The MSE profile and its first differences as two charts.
pub fn mse_charts(profile: &MseProfile) -> (LineChart, LineChart) {
    let p: Vec<f64> = profile.p_values().iter().map(|&v| v as f64).collect();
    let mut mse = LineChart::new("Average residual MSE vs basis size", "p", "MSE");
    mse.push(Series::line("MSE", p.clone(), profile.mse_hat().to_vec(), "black").with_markers());
    let mut diff = LineChart::new("First difference of MSE", "p", "delta MSE");
    if profile.len() > 1 {
        diff.push(
            Series::line(
                "first difference",
                p[1..].to_vec(),
                profile.first_diff().to_vec(),
                "black",
            )
            .with_markers(),
        );
    }
    (mse, diff)
}

/// Change curves; undefined stretches split the polyline.
pub fn change_chart(title: &str, curves: &[&ChangeCurve], as_percent: bool) -> LineChart {
    let colors = ["black", "red", "blue", "green", "brown"];
    let scale = if as_percent { 100.0 } else { 1.0 };
    let y_label = if as_percent {
        "change (%)"
    } else {
        "change (fraction)"
    };
    let mut chart = LineChart::new(title, "day of year", y_label);
    for (i, c) in curves.iter().enumerate() {
        let color = colors[i % colors.len()];
        let mut seg_x = Vec::new();
        let mut seg_y = Vec::new();
        let mut first_segment = true;
        let flush =
            |seg_x: &mut Vec<f64>, seg_y: &mut Vec<f64>, first: &mut bool, chart: &mut LineChart| {
                if seg_x.is_empty() {
                    return;
                }
                let label = if *first {
                    format!("{} vs {}", c.target_label(), c.baseline_label())
                } else {
                    String::new()
                };
                let mut s = Series::line(label, std::mem::take(seg_x), std::mem::take(seg_y), color);
                if !*first {
                    s = s.hidden_from_legend();
                }
                *first = false;
                chart.push(s);
            };
        for (d, v) in c.grid().iter().zip(c.values()) {
            match v {
                Some(x) => {
                    seg_x.push(*d);
                    seg_y.push(scale * x);
                }
                None => flush(&mut seg_x, &mut seg_y, &mut first_segment, &mut chart),
            }
        }
        flush(&mut seg_x, &mut seg_y, &mut first_segment, &mut chart);
    }
    chart
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_occurrences(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn empty_chart_is_axes_only_valid_xml() {
        let chart = LineChart::new("empty", "x", "y");
        let svg = chart.to_svg(640, 400);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert_eq!(count_occurrences(&svg, "<polyline"), 0);
        // Balanced text tags.
        assert_eq!(
            count_occurrences(&svg, "<text"),
            count_occurrences(&svg, "</text>")
        );
    }

    #[test]
    fn one_grid_function_is_one_polyline_with_all_vertices() {
        let grid: Vec<f64> = (1..=50).map(f64::from).collect();
        let values: Vec<f64> = grid.iter().map(|t| t.sin()).collect();
        let f = GridFunction::new(grid, values, "demo").unwrap();
        let chart = curves_chart("one", "day", "v", &[&f], None);
        let svg = chart.to_svg(640, 400);
        assert_eq!(count_occurrences(&svg, "<polyline"), 1);
        let points_attr = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(points_attr.split(' ').count(), 50);
    }

    #[test]
    fn band_chart_has_two_dotted_and_one_solid_per_band() {
        use crate::basis::FourierBasis;
        use crate::bootstrap::bootstrap_band;
        use crate::smooth::{CurveEnsemble, FourierCurve};

        let basis = FourierBasis::annual(3).unwrap();
        let curves: Vec<FourierCurve> = (0..4)
            .map(|i| {
                FourierCurve::new(basis, vec![5.0 + i as f64 * 0.3, 1.0, 0.2], 1990 + i).unwrap()
            })
            .collect();
        let grid: Vec<f64> = (1..=30).map(f64::from).collect();
        let block = CurveEnsemble::new(curves, grid).unwrap();
        let band = bootstrap_band(&block, 50, 0.95, 3).unwrap();
        let chart = bands_chart("bands", &[&band]);
        let svg = chart.to_svg(640, 400);
        assert_eq!(count_occurrences(&svg, "<polyline"), 3);
        assert_eq!(count_occurrences(&svg, "stroke-dasharray"), 2);
        // All three in the block color for a single band (black).
        assert_eq!(count_occurrences(&svg, r#"stroke="black" stroke-width="1.4""#), 3);
    }

    #[test]
    fn palette_follows_block_count() {
        assert_eq!(block_palette(2), vec!["red", "blue"]);
        assert_eq!(block_palette(3), vec!["red", "green", "blue"]);
        assert_eq!(block_palette(4), vec!["red", "green", "brown", "blue"]);
        assert_eq!(
            block_palette(5),
            vec!["red", "green", "brown", "goldenrod", "blue"]
        );
    }

    #[test]
    fn title_is_escaped() {
        let chart = LineChart::new("a < b & c", "x", "y");
        let svg = chart.to_svg(320, 200);
        assert!(svg.contains("a &lt; b &amp; c"));
    }

    #[test]
    fn change_chart_splits_on_undefined() {
        use crate::change::percentage_change;
        let grid: Vec<f64> = (1..=6).map(f64::from).collect();
        let base =
            GridFunction::new(grid.clone(), vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0], "b").unwrap();
        let target = GridFunction::new(grid, vec![2.0; 6], "t").unwrap();
        let c = percentage_change(&base, &target, 1e-9).unwrap();
        let chart = change_chart("c", &[&c], false);
        // Two defined segments of two points each.
        assert_eq!(chart.series.len(), 2);
        let svg = chart.to_svg(640, 400);
        assert_eq!(count_occurrences(&svg, "<polyline"), 2);
    }

    #[test]
    fn deterministic_output() {
        let grid: Vec<f64> = (1..=20).map(f64::from).collect();
        let f = GridFunction::new(grid.clone(), grid.clone(), "id").unwrap();
        let a = curves_chart("t", "x", "y", &[&f], None).to_svg(400, 300);
        let b = curves_chart("t", "x", "y", &[&f], None).to_svg(400, 300);
        assert_eq!(a, b);
    }
}
