//! Recursive shrinking-window line detection.
//!
//! A window is anchored at the first unexplained sample and initially
//! reaches the end of the data. While its least-squares line is not good
//! enough (R² below the threshold and a non-zero residual) the far end is
//! pulled in by one sample. The accepted window becomes a [`LineSegment`],
//! its last sample becomes the next anchor, and the scan restarts from the
//! end of the data. Neighbouring segments therefore share their joint
//! sample: `next.start_idx == prev.end_idx`.
//!
//! ```
//! use entroseg::segmentation::{segment, SegmentationConfig};
//!
//! let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
//! let y: Vec<f64> = x.iter().map(|&v| if v < 5.0 { v } else { 10.0 - v }).collect();
//! let segs = segment(&x, &y, &SegmentationConfig::new(0.999)).unwrap();
//! assert_eq!(segs.len(), 2);
//! assert_eq!((segs[0].start_idx, segs[0].end_idx), (0, 5));
//! assert_eq!((segs[1].start_idx, segs[1].end_idx), (5, 9));
//! ```

mod hough;
mod report;

pub use hough::{classify, to_hough, HoughPoint, SegmentLabel, DEFAULT_SHORT_FRAC};
pub use report::{SegmentRecord, SegmentationReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{ols_line, LineFit};
use crate::signal::validate;

/// Which end of the remaining data the window is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Traversal {
    /// Anchor on the left, shrink the right end (default).
    #[default]
    LeftAnchored,
    /// Mirror image: anchor on the right, shrink the left end.
    RightAnchored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Minimum R² for a window to be accepted as a line.
    pub rm2: f64,
    /// Upper bound on the number of lines. Reaching it is an error.
    pub max_lines: usize,
    /// Shortest window the scan may shrink to.
    pub min_len: usize,
    #[serde(default)]
    pub traversal: Traversal,
}

pub const DEFAULT_MAX_LINES: usize = 256;

impl SegmentationConfig {
    pub fn new(rm2: f64) -> Self {
        SegmentationConfig {
            rm2,
            max_lines: DEFAULT_MAX_LINES,
            min_len: 2,
            traversal: Traversal::LeftAnchored,
        }
    }

    pub fn with_max_lines(mut self, max_lines: usize) -> Self {
        self.max_lines = max_lines;
        self
    }

    pub fn with_min_len(mut self, min_len: usize) -> Self {
        self.min_len = min_len;
        self
    }

    pub fn with_traversal(mut self, traversal: Traversal) -> Self {
        self.traversal = traversal;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rm2 > 0.0 && self.rm2 <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rm2 must lie in (0, 1], got {}",
                self.rm2
            )));
        }
        if self.min_len < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_len must be at least 2, got {}",
                self.min_len
            )));
        }
        if self.max_lines == 0 {
            return Err(Error::InvalidConfig("max_lines must be at least 1".into()));
        }
        Ok(())
    }
}

/// One detected affine piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineSegment {
    pub start_idx: usize,
    pub end_idx: usize,
    pub fit: LineFit,
    /// `atan(a)` in degrees.
    pub alpha_deg: f64,
    pub length_pts: usize,
    /// Abscissa of the last sample.
    pub position: f64,
}

impl LineSegment {
    pub fn from_window(x: &[f64], y: &[f64], start_idx: usize, end_idx: usize) -> Result<Self> {
        let fit = ols_line(&x[start_idx..=end_idx], &y[start_idx..=end_idx])?;
        Ok(LineSegment {
            start_idx,
            end_idx,
            fit,
            alpha_deg: slope_angle_deg(fit.a),
            length_pts: end_idx - start_idx + 1,
            position: x[end_idx],
        })
    }
}

pub fn slope_angle_deg(a: f64) -> f64 {
    a.atan() * 180.0 / std::f64::consts::PI
}

/// Why the scan stopped shrinking a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptReason {
    /// R² reached the threshold.
    Threshold,
    /// Residuals are exactly zero (flat or exactly affine window).
    ExactFit,
    /// The window could not shrink further.
    MinLength,
    /// The line cap was reached and the rest of the data was taken whole.
    Remainder,
}

/// One evaluated window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    /// Index of the line this window competes for (0-based).
    pub line: usize,
    /// Moving end of the window.
    pub j: usize,
    pub start_idx: usize,
    pub end_idx: usize,
    pub r2: f64,
    pub accepted: Option<AcceptReason>,
}

/// Detects the line segments of `(x, y)`.
///
/// On [`Error::TooManyLines`] the error carries a full cover whose last
/// segment is the unexplained remainder.
pub fn segment(x: &[f64], y: &[f64], cfg: &SegmentationConfig) -> Result<Vec<LineSegment>> {
    run(x, y, cfg, None)
}

/// Same traversal as [`segment`], returning every evaluated window.
pub fn detection_trace(x: &[f64], y: &[f64], cfg: &SegmentationConfig) -> Result<Vec<TraceStep>> {
    let mut trace = Vec::new();
    run(x, y, cfg, Some(&mut trace))?;
    Ok(trace)
}

/// Number of windows evaluated for each line, in detection order.
pub fn iterations_per_line(trace: &[TraceStep]) -> Vec<usize> {
    let mut counts = Vec::new();
    for step in trace {
        if counts.len() <= step.line {
            counts.resize(step.line + 1, 0);
        }
        counts[step.line] += 1;
    }
    counts
}

fn run(
    x: &[f64],
    y: &[f64],
    cfg: &SegmentationConfig,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<Vec<LineSegment>> {
    validate(x, y)?;
    cfg.validate()?;
    let n = x.len();

    let (vx, vy): (Vec<f64>, Vec<f64>) = match cfg.traversal {
        Traversal::LeftAnchored => (x.to_vec(), y.to_vec()),
        Traversal::RightAnchored => (
            x.iter().rev().copied().collect(),
            y.iter().rev().copied().collect(),
        ),
    };
    // virtual index → original index
    let orig = |k: usize| match cfg.traversal {
        Traversal::LeftAnchored => k,
        Traversal::RightAnchored => n - 1 - k,
    };

    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut capped = false;
    let mut scan = Scanner::new(&vx, &vy, cfg);
    let mut anchor = 0;
    while anchor < n - 1 {
        let line = windows.len();
        let mut steps = Vec::new();
        let end = scan.longest_window(anchor, line, trace.as_ref().map(|_| &mut steps))?;
        if end < n - 1 && line + 1 == cfg.max_lines {
            if let Some(t) = trace.as_deref_mut() {
                t.extend(steps.into_iter().map(|s| remap(s, &orig)));
                t.push(remap(
                    TraceStep {
                        line,
                        j: n - 1,
                        start_idx: anchor,
                        end_idx: n - 1,
                        r2: ols_line(&vx[anchor..], &vy[anchor..])?.r2,
                        accepted: Some(AcceptReason::Remainder),
                    },
                    &orig,
                ));
            }
            windows.push((anchor, n - 1));
            capped = true;
            break;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.extend(steps.into_iter().map(|s| remap(s, &orig)));
        }
        windows.push((anchor, end));
        anchor = end;
    }

    let mut segments = windows
        .into_iter()
        .map(|(s, e)| {
            let (s, e) = match cfg.traversal {
                Traversal::LeftAnchored => (s, e),
                Traversal::RightAnchored => (orig(e), orig(s)),
            };
            LineSegment::from_window(x, y, s, e)
        })
        .collect::<Result<Vec<_>>>()?;
    if cfg.traversal == Traversal::RightAnchored {
        segments.reverse();
    }

    if capped {
        Err(Error::TooManyLines {
            max_lines: cfg.max_lines,
            segments,
        })
    } else {
        Ok(segments)
    }
}

fn remap(mut s: TraceStep, orig: &impl Fn(usize) -> usize) -> TraceStep {
    let (a, b) = (orig(s.start_idx), orig(s.end_idx));
    s.start_idx = a.min(b);
    s.end_idx = a.max(b);
    s.j = orig(s.j);
    s
}

/// Slack below the threshold inside which a window is re-evaluated with the
/// exact two-pass fit instead of the running sums.
const FAST_REJECT_MARGIN: f64 = 1e-7;

/// Centered sums of squares below this fraction of the raw second moment at
/// the last recomputation are treated as cancellation noise.
const CANCELLATION_FLOOR: f64 = 1e-9;

/// Running sums over a window `[anchor, j]` in coordinates shifted by the
/// anchor sample, so that shrinking the window is O(1).
struct Scanner<'a> {
    x: &'a [f64],
    y: &'a [f64],
    cfg: &'a SegmentationConfig,
}

#[derive(Default)]
struct Sums {
    n: f64,
    u: f64,
    v: f64,
    uu: f64,
    vv: f64,
    uv: f64,
}

impl<'a> Scanner<'a> {
    fn new(x: &'a [f64], y: &'a [f64], cfg: &'a SegmentationConfig) -> Self {
        Scanner { x, y, cfg }
    }

    fn sums(&self, anchor: usize, end: usize) -> Sums {
        let (x0, y0) = (self.x[anchor], self.y[anchor]);
        let mut s = Sums::default();
        for k in anchor..=end {
            s.add(self.x[k] - x0, self.y[k] - y0, 1.0);
        }
        s
    }

    /// End index of the longest acceptable window starting at `anchor`.
    fn longest_window(
        &mut self,
        anchor: usize,
        line: usize,
        mut steps: Option<&mut Vec<TraceStep>>,
    ) -> Result<usize> {
        let n = self.x.len();
        let min_end = (anchor + self.cfg.min_len - 1).min(n - 1);
        let (x0, y0) = (self.x[anchor], self.y[anchor]);
        let mut j = n - 1;
        let mut sums = self.sums(anchor, j);
        let mut fresh_len = j - anchor + 1;
        let mut floor = CANCELLATION_FLOOR * sums.vv;

        loop {
            let len = j - anchor + 1;
            let mut log = |r2: f64, accepted: Option<AcceptReason>| {
                if let Some(st) = steps.as_deref_mut() {
                    st.push(TraceStep {
                        line,
                        j,
                        start_idx: anchor,
                        end_idx: j,
                        r2,
                        accepted,
                    });
                }
            };

            if j <= min_end {
                let fit = ols_line(&self.x[anchor..=j], &self.y[anchor..=j])?;
                log(fit.r2, Some(AcceptReason::MinLength));
                return Ok(j);
            }

            let (fast_r2, syy) = sums.r2();
            if syy > floor && fast_r2 < self.cfg.rm2 - FAST_REJECT_MARGIN {
                log(fast_r2, None);
            } else {
                let fit = ols_line(&self.x[anchor..=j], &self.y[anchor..=j])?;
                let verdict = if fit.r2 >= self.cfg.rm2 {
                    Some(AcceptReason::Threshold)
                } else if fit.mean_abs_error == 0.0 {
                    Some(AcceptReason::ExactFit)
                } else {
                    None
                };
                log(fit.r2, verdict);
                if verdict.is_some() {
                    return Ok(j);
                }
            }

            sums.add(self.x[j] - x0, self.y[j] - y0, -1.0);
            j -= 1;
            if 2 * (len - 1) < fresh_len {
                sums = self.sums(anchor, j);
                fresh_len = j - anchor + 1;
                floor = CANCELLATION_FLOOR * sums.vv;
            }
        }
    }
}

impl Sums {
    fn add(&mut self, u: f64, v: f64, sign: f64) {
        self.n += sign;
        self.u += sign * u;
        self.v += sign * v;
        self.uu += sign * u * u;
        self.vv += sign * v * v;
        self.uv += sign * u * v;
    }

    /// Approximate R² and centered y sum of squares.
    fn r2(&self) -> (f64, f64) {
        let sxx = self.uu - self.u * self.u / self.n;
        let syy = self.vv - self.v * self.v / self.n;
        let sxy = self.uv - self.u * self.v / self.n;
        if sxx <= 0.0 || syy <= 0.0 {
            return (0.0, syy.max(0.0));
        }
        ((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0), syy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::piecewise_test_fixture;

    fn idx(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn single_line_is_one_segment() {
        let x = idx(30);
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v - 3.0).collect();
        for rm2 in [0.5, 0.99, 0.999999] {
            let segs = segment(&x, &y, &SegmentationConfig::new(rm2)).unwrap();
            assert_eq!(segs.len(), 1);
            assert_eq!((segs[0].start_idx, segs[0].end_idx), (0, 29));
            assert!((segs[0].fit.r2 - 1.0).abs() < 1e-12);
        }
        let trace = detection_trace(&x, &y, &SegmentationConfig::new(0.99)).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].accepted, Some(AcceptReason::Threshold));
    }

    #[test]
    fn fixture_segments() {
        let s = piecewise_test_fixture();
        let segs = segment(s.x(), s.y(), &SegmentationConfig::new(0.998)).unwrap();
        let ranges: Vec<_> = segs.iter().map(|s| (s.start_idx, s.end_idx)).collect();
        assert_eq!(ranges, vec![(0, 20), (20, 29), (29, 30), (30, 40)]);
        // joiner through (1.8, 1.8) and (2, 8)
        assert!((segs[2].fit.a - 31.0).abs() < 1e-9);
        assert_eq!(segs[2].length_pts, 2);
        assert_eq!(segs[3].position, 4.0);
    }

    #[test]
    fn flat_plateaus_use_exact_fit_escape() {
        // unit step: flat, jump, flat
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        let x = idx(20);
        let trace = detection_trace(&x, &y, &SegmentationConfig::new(0.99)).unwrap();
        let accepted: Vec<_> = trace.iter().filter_map(|t| t.accepted).collect();
        assert_eq!(
            accepted,
            vec![
                AcceptReason::ExactFit,
                AcceptReason::MinLength,
                AcceptReason::ExactFit
            ]
        );
    }

    #[test]
    fn min_length_escape_is_logged() {
        let x = idx(6);
        let y = [0.0, 1.0, 2.0, 3.0, 4.0, 10.0];
        let cfg = SegmentationConfig::new(0.999);
        let segs = segment(&x, &y, &cfg).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[1].start_idx, segs[1].end_idx), (4, 5));
        let trace = detection_trace(&x, &y, &cfg).unwrap();
        assert_eq!(
            trace.last().unwrap().accepted,
            Some(AcceptReason::MinLength)
        );
    }

    #[test]
    fn larger_min_len_stops_earlier() {
        let x = idx(12);
        let y: Vec<f64> = x.iter().map(|v| (v * 1.7).sin()).collect();
        let cfg = SegmentationConfig::new(0.9999).with_min_len(4);
        let segs = segment(&x, &y, &cfg).unwrap();
        for s in &segs[..segs.len() - 1] {
            assert!(s.length_pts >= 4);
        }
        assert_eq!(segs.last().unwrap().end_idx, 11);
    }

    #[test]
    fn cap_is_an_error_with_full_cover() {
        let s = piecewise_test_fixture();
        let cfg = SegmentationConfig::new(0.998).with_max_lines(2);
        match segment(s.x(), s.y(), &cfg) {
            Err(Error::TooManyLines {
                max_lines,
                segments,
            }) => {
                assert_eq!(max_lines, 2);
                assert_eq!(segments.len(), 2);
                assert_eq!(segments[0].end_idx, 20);
                assert_eq!((segments[1].start_idx, segments[1].end_idx), (20, 40));
            }
            other => panic!("expected TooManyLines, got {other:?}"),
        }
        // exactly enough lines is fine
        let cfg = SegmentationConfig::new(0.998).with_max_lines(4);
        assert_eq!(segment(s.x(), s.y(), &cfg).unwrap().len(), 4);
    }

    #[test]
    fn invalid_inputs() {
        let x = idx(5);
        let y = [0.0; 5];
        assert!(matches!(
            segment(&x, &y, &SegmentationConfig::new(0.0)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            segment(&x, &y, &SegmentationConfig::new(0.9).with_min_len(1)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            segment(&x[..1], &y[..1], &SegmentationConfig::new(0.9)),
            Err(Error::TooFewPoints { .. })
        ));
        assert!(matches!(
            segment(&[0.0, 2.0, 1.0], &[0.0; 3], &SegmentationConfig::new(0.9)),
            Err(Error::NonMonotonicAbscissa { .. })
        ));
    }

    #[test]
    fn right_anchored_mirrors_left_anchored() {
        let s = piecewise_test_fixture();
        let left = segment(s.x(), s.y(), &SegmentationConfig::new(0.998)).unwrap();
        let cfg = SegmentationConfig::new(0.998).with_traversal(Traversal::RightAnchored);
        let right = segment(s.x(), s.y(), &cfg).unwrap();
        assert_eq!(right.first().unwrap().start_idx, 0);
        assert_eq!(right.last().unwrap().end_idx, 40);
        for w in right.windows(2) {
            assert_eq!(w[0].end_idx, w[1].start_idx);
        }
        // exact pieces are found from either side
        let l: Vec<_> = left.iter().map(|s| (s.start_idx, s.end_idx)).collect();
        let r: Vec<_> = right.iter().map(|s| (s.start_idx, s.end_idx)).collect();
        assert_eq!(l, r);
        let trace = detection_trace(s.x(), s.y(), &cfg).unwrap();
        assert!(trace.iter().all(|t| t.start_idx < t.end_idx));
    }

    #[test]
    fn flat_run_before_steep_ramp_is_one_line() {
        // removing the ramp from the running sums leaves rounding residue in
        // an exactly flat window
        let mut y = vec![0.0; 7];
        y.extend((1..=4).map(|k| k as f64 * 5.671281819617707));
        let x = idx(y.len());
        let segs = segment(&x, &y, &SegmentationConfig::new(0.999)).unwrap();
        let ends: Vec<usize> = segs.iter().map(|s| s.end_idx).collect();
        assert_eq!(ends, vec![6, 10]);
    }

    #[test]
    fn fast_path_agrees_with_exact_scan() {
        // brute force: exact fit on every window, no running sums
        fn reference(x: &[f64], y: &[f64], rm2: f64) -> Vec<(usize, usize)> {
            let n = x.len();
            let mut out = Vec::new();
            let mut a = 0;
            while a < n - 1 {
                let mut j = n - 1;
                while j > a + 1 {
                    let f = ols_line(&x[a..=j], &y[a..=j]).unwrap();
                    if f.r2 >= rm2 || f.mean_abs_error == 0.0 {
                        break;
                    }
                    j -= 1;
                }
                out.push((a, j));
                a = j;
            }
            out
        }
        let mut g = crate::rng::RngSeed(77).stream();
        for trial in 0..40 {
            let n = 20 + trial * 5;
            let x = idx(n);
            let mut y = vec![0.0; n];
            for k in 1..n {
                y[k] = y[k - 1] + g.standard_normal() + 0.3;
            }
            let rm2 = 0.9 + 0.099 * g.uniform();
            let got: Vec<_> = segment(&x, &y, &SegmentationConfig::new(rm2).with_max_lines(n))
                .unwrap()
                .iter()
                .map(|s| (s.start_idx, s.end_idx))
                .collect();
            assert_eq!(got, reference(&x, &y, rm2), "trial {trial}");
        }
    }
}
