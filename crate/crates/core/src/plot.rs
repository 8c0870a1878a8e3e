//! Minimal self-contained SVG charts for reports.
//!
//! Each figure is a vertical stack of panels with linear axes. No fonts,
//! stylesheets or scripts are referenced.

use std::fmt::Write as _;

use crate::entropy::EntropyCurve;
use crate::experiments::{BeamFixture, BeamReport, SweepResult, TangentStudy};
use crate::segmentation::{LineSegment, SegmentLabel};
use crate::signal::Signal;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 46.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf",
];
pub const SINGULAR_COLOR: &str = "#d62728";
const NEUTRAL: &str = "#555555";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Points,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
    pub color: String,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>, color: &str) -> Self {
        Series {
            label: label.into(),
            points,
            mark: Mark::Line,
            color: color.to_string(),
        }
    }

    pub fn points(label: impl Into<String>, points: Vec<(f64, f64)>, color: &str) -> Self {
        Series {
            label: label.into(),
            points,
            mark: Mark::Points,
            color: color.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical guide lines (e.g. a known damage position).
    pub x_markers: Vec<f64>,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Panel {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn marker(mut self, x: f64) -> Self {
        self.x_markers.push(x);
        self
    }
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let pts = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts.copied() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    for &m in &panel.x_markers {
        x0 = x0.min(m);
        x1 = x1.max(m);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        if hi > lo {
            let p = 0.04 * (hi - lo);
            (lo - p, hi + p)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = if y0.is_finite() {
        pad(y0, y1)
    } else {
        (0.0, 1.0)
    };
    (x0, x1, y0, y1)
}

/// About five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render_panel(out: &mut String, panel: &Panel, top: f64) {
    let (x0, x1, y0, y1) = bounds(panel);
    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let ptop = top + MARGIN_TOP;
    let pbot = top + PANEL_HEIGHT - MARGIN_BOTTOM;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let sy = |y: f64| pbot - (y - y0) / (y1 - y0) * (pbot - ptop);

    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{ptop}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        right - left,
        pbot - ptop
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="15">{}</text>"#,
        (left + right) / 2.0,
        top + 22.0,
        escape(&panel.title)
    );
    for t in ticks(x0, x1) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{pbot}" x2="{0:.1}" y2="{1}" stroke="#999"/><text x="{0:.1}" y="{2}" text-anchor="middle" font-size="11">{3}</text>"##,
            sx(t),
            pbot + 5.0,
            pbot + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y0, y1) {
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1:.1}" x2="{left}" y2="{1:.1}" stroke="#999"/><text x="{2}" y="{3:.1}" text-anchor="end" font-size="11">{4}</text>"##,
            left - 5.0,
            sy(t),
            left - 8.0,
            sy(t) + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        (left + right) / 2.0,
        pbot + 36.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {0})">{1}</text>"#,
        (ptop + pbot) / 2.0,
        escape(&panel.y_label)
    );
    for &m in &panel.x_markers {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{ptop}" x2="{0:.1}" y2="{pbot}" stroke="#888" stroke-dasharray="4 3"/>"##,
            sx(m)
        );
    }

    let mut legend_y = ptop + 14.0;
    for s in &panel.series {
        let finite: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        match s.mark {
            Mark::Line => {
                let d: Vec<String> = finite
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
                    d.join(" "),
                    s.color
                );
            }
            Mark::Points => {
                for &(x, y) in &finite {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                        sx(x),
                        sy(y),
                        s.color
                    );
                }
            }
        }
        if !s.label.is_empty() {
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
                right - 150.0,
                legend_y - 9.0,
                s.color,
                right - 135.0,
                legend_y,
                escape(&s.label)
            );
            legend_y += 15.0;
        }
    }
}

/// Renders the panels top to bottom into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, k as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    out
}

fn xy(s: &Signal) -> Vec<(f64, f64)> {
    s.x().iter().copied().zip(s.y().iter().copied()).collect()
}

fn label_color(label: SegmentLabel, k: usize) -> &'static str {
    match label {
        SegmentLabel::Singularity => SINGULAR_COLOR,
        SegmentLabel::Homogeneous => PALETTE[k % PALETTE.len()],
    }
}

fn detected_lines(x: &[f64], segments: &[LineSegment], labels: &[SegmentLabel]) -> Vec<Series> {
    segments
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(k, (s, &l))| {
            let (xa, xb) = (x[s.start_idx], x[s.end_idx]);
            Series::line(
                "",
                vec![(xa, s.fit.predict(xa)), (xb, s.fit.predict(xb))],
                label_color(l, k),
            )
        })
        .collect()
}

/// Analysed curve with its detected lines, and the Hough-space scatter of
/// position against length and against slope angle. Singular lines are
/// drawn in red.
pub fn segmentation_figure(
    analysed: &Signal,
    segments: &[LineSegment],
    labels: &[SegmentLabel],
) -> String {
    let mut top =
        Panel::new("Detected lines", "x", "y").with(Series::line("data", xy(analysed), NEUTRAL));
    top.series
        .extend(detected_lines(analysed.x(), segments, labels));
    render(&[
        top,
        hough_length_panel(segments, labels),
        hough_angle_panel(segments, labels),
    ])
}

type Points = Vec<(f64, f64)>;

fn split_by_label(
    segments: &[LineSegment],
    labels: &[SegmentLabel],
    f: impl Fn(&LineSegment) -> (f64, f64),
) -> (Points, Points) {
    let mut hom = Vec::new();
    let mut sing = Vec::new();
    for (s, l) in segments.iter().zip(labels) {
        match l {
            SegmentLabel::Homogeneous => hom.push(f(s)),
            SegmentLabel::Singularity => sing.push(f(s)),
        }
    }
    (hom, sing)
}

fn hough_length_panel(segments: &[LineSegment], labels: &[SegmentLabel]) -> Panel {
    let (hom, sing) = split_by_label(segments, labels, |s| (s.position, s.length_pts as f64));
    Panel::new("Line length by position", "position", "length (samples)")
        .with(Series::points("homogeneous", hom, PALETTE[0]))
        .with(Series::points("singularity", sing, SINGULAR_COLOR))
}

fn hough_angle_panel(segments: &[LineSegment], labels: &[SegmentLabel]) -> Panel {
    let (hom, sing) = split_by_label(segments, labels, |s| (s.position, s.alpha_deg));
    Panel::new("Slope angle by position", "position", "alpha (deg)")
        .with(Series::points("homogeneous", hom, PALETTE[0]))
        .with(Series::points("singularity", sing, SINGULAR_COLOR))
}

/// A signal and its entropy curve.
pub fn entropy_figure(signal: &Signal, curve: &EntropyCurve) -> String {
    let e: Vec<(f64, f64)> = curve
        .x
        .iter()
        .copied()
        .zip(curve.h.iter().copied())
        .collect();
    render(&[
        Panel::new("Signal", "x", "y").with(Series::line("", xy(signal), PALETTE[0])),
        Panel::new("Entropy", "x", "h").with(Series::line("", e, PALETTE[1])),
    ])
}

/// Optimal threshold against noise level, and the success rate of every
/// grid value.
pub fn sweep_figure(r: &SweepResult) -> String {
    let opt: Vec<(f64, f64)> = r
        .rows
        .iter()
        .filter_map(|row| row.optimal_rm2.map(|v| (row.noise_std, v)))
        .collect();
    let mut rates = Panel::new(
        "Trials with the target line count",
        "noise std",
        "success rate",
    );
    for (g, rm2) in r.rm2_grid.iter().enumerate() {
        let pts = r
            .rows
            .iter()
            .map(|row| (row.noise_std, row.success_rates[g]))
            .collect();
        rates = rates.with(Series::line(
            format!("rm2 = {rm2}"),
            pts,
            PALETTE[g % PALETTE.len()],
        ));
    }
    render(&[
        Panel::new("Optimal R² by noise level", "noise std", "optimal rm2")
            .with(Series::line("", opt.clone(), PALETTE[0]))
            .with(Series::points("", opt, PALETTE[0])),
        rates,
    ])
}

/// Tangent samples, medians and the fitted exponential against H.
pub fn tangent_figure(study: &TangentStudy) -> String {
    let samples = study.samples.iter().map(|s| (s.hurst, s.tangent)).collect();
    let medians = study.medians.iter().map(|s| (s.hurst, s.tangent)).collect();
    let (lo, hi) = study
        .medians
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), m| {
            (l.min(m.hurst), h.max(m.hurst))
        });
    let curve = (0..=50)
        .map(|k| {
            let h = lo + (hi - lo) * k as f64 / 50.0;
            (h, study.fit.predict(h))
        })
        .collect();
    render(&[Panel::new(
        "Tangent of the dominant line by Hurst exponent",
        "H",
        "tangent",
    )
    .with(Series::points("trials", samples, "#9ecae1"))
    .with(Series::points("median", medians, PALETTE[0]))
    .with(Series::line(
        format!("{:.3}·exp({:.3}·H)", study.fit.a, study.fit.b),
        curve,
        SINGULAR_COLOR,
    ))])
}

/// Mode shape, its entropy with detected lines, and the Hough scatters,
/// each with the damage position marked.
pub fn beam_figure(fx: &BeamFixture, report: &BeamReport) -> String {
    let d = fx.damage_idx as f64;
    let segments = &report.lines;
    let labels: Vec<SegmentLabel> = report
        .segmentation
        .segments
        .iter()
        .map(|r| r.label)
        .collect();
    let curve = crate::entropy::entropy_transform(&fx.signal).to_index_signal();
    let mut ent = Panel::new("Entropy and detected lines", "sample", "h")
        .with(Series::line("entropy", xy(&curve), NEUTRAL))
        .marker(d);
    ent.series
        .extend(detected_lines(curve.x(), segments, &labels));
    render(&[
        Panel::new("Mode shape", "sample", "deflection")
            .with(Series::line("", xy(&fx.signal), PALETTE[0]))
            .marker(d),
        ent,
        hough_angle_panel(segments, &labels).marker(d),
        hough_length_panel(segments, &labels).marker(d),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_values_are_round() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(-0.5, 0.5), vec![-0.4, -0.2, 0.0, 0.2, 0.4]);
        assert_eq!(fmt_tick(0.2), "0.2");
        assert_eq!(fmt_tick(2e-6), "2.0e-6");
    }

    #[test]
    fn document_is_self_contained() {
        let s = Signal::from_values(vec![0.0, 1.0, 0.5, 2.0]).unwrap();
        let svg = entropy_figure(&s, &crate::entropy::entropy_transform(&s));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render(&[Panel::new("a<b & c", "x", "y")]);
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
