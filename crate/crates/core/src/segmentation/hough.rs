use serde::{Deserialize, Serialize};

use super::LineSegment;
use crate::error::{Error, Result};

/// A detected line in parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoughPoint {
    pub position: f64,
    pub length_pts: usize,
    pub alpha_deg: f64,
    pub intercept: f64,
    pub mean_abs_error: f64,
}

impl From<&LineSegment> for HoughPoint {
    fn from(s: &LineSegment) -> Self {
        HoughPoint {
            position: s.position,
            length_pts: s.length_pts,
            alpha_deg: s.alpha_deg,
            intercept: s.fit.b,
            mean_abs_error: s.fit.mean_abs_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentLabel {
    Homogeneous,
    Singularity,
}

pub const DEFAULT_SHORT_FRAC: f64 = 0.25;

pub fn to_hough(segments: &[LineSegment]) -> Result<Vec<HoughPoint>> {
    if segments.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(segments.iter().map(HoughPoint::from).collect())
}

/// Labels a line as a singularity when it spans at most two samples or is
/// shorter than `short_frac` times the median line length.
pub fn classify(points: &[HoughPoint], short_frac: f64) -> Result<Vec<(HoughPoint, SegmentLabel)>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(short_frac > 0.0 && short_frac < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "short_frac must lie in (0, 1), got {short_frac}"
        )));
    }
    let cutoff = short_frac * median_length(points);
    Ok(points
        .iter()
        .map(|p| {
            let short = p.length_pts <= 2 || (p.length_pts as f64) < cutoff;
            let label = if short {
                SegmentLabel::Singularity
            } else {
                SegmentLabel::Homogeneous
            };
            (*p, label)
        })
        .collect())
}

fn median_length(points: &[HoughPoint]) -> f64 {
    let mut l: Vec<usize> = points.iter().map(|p| p.length_pts).collect();
    l.sort_unstable();
    let m = l.len() / 2;
    if l.len() % 2 == 1 {
        l[m] as f64
    } else {
        (l[m - 1] + l[m]) as f64 / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::LineFit;
    use crate::segmentation::slope_angle_deg;

    fn point(len: usize) -> HoughPoint {
        HoughPoint {
            position: len as f64,
            length_pts: len,
            alpha_deg: 0.0,
            intercept: 0.0,
            mean_abs_error: 0.0,
        }
    }

    #[test]
    fn angles() {
        assert!((slope_angle_deg(1.0) - 45.0).abs() < 1e-12);
        assert_eq!(slope_angle_deg(0.0), 0.0);
        assert!((slope_angle_deg(3.0) - 71.565).abs() < 1e-3);
        assert!((slope_angle_deg(-1.0) + 45.0).abs() < 1e-12);
    }

    #[test]
    fn projection_copies_fields() {
        let seg = LineSegment {
            start_idx: 3,
            end_idx: 9,
            fit: LineFit {
                a: 1.0,
                b: -2.0,
                r2: 0.99,
                mean_abs_error: 0.1,
            },
            alpha_deg: 45.0,
            length_pts: 7,
            position: 1.5,
        };
        let h = to_hough(std::slice::from_ref(&seg)).unwrap();
        assert_eq!(
            h[0],
            HoughPoint {
                position: 1.5,
                length_pts: 7,
                alpha_deg: 45.0,
                intercept: -2.0,
                mean_abs_error: 0.1
            }
        );
        assert!(matches!(to_hough(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn equal_lengths_are_homogeneous() {
        let pts = vec![point(10); 5];
        assert!(classify(&pts, 0.25)
            .unwrap()
            .iter()
            .all(|(_, l)| *l == SegmentLabel::Homogeneous));
    }

    #[test]
    fn joiner_is_singular() {
        let pts: Vec<_> = [21, 10, 2, 11].into_iter().map(point).collect();
        let labels: Vec<_> = classify(&pts, 0.25)
            .unwrap()
            .into_iter()
            .map(|(_, l)| l)
            .collect();
        use SegmentLabel::*;
        assert_eq!(
            labels,
            vec![Homogeneous, Homogeneous, Singularity, Homogeneous]
        );
    }

    #[test]
    fn short_relative_to_median() {
        // median 40 → cutoff 10: a 9-sample line is short, 10 is not
        let pts: Vec<_> = [40, 9, 40, 10, 40].into_iter().map(point).collect();
        let labels: Vec<_> = classify(&pts, 0.25)
            .unwrap()
            .into_iter()
            .map(|(_, l)| l)
            .collect();
        assert_eq!(labels[1], SegmentLabel::Singularity);
        assert_eq!(labels[3], SegmentLabel::Homogeneous);
    }

    #[test]
    fn classify_errors() {
        assert!(matches!(classify(&[], 0.25), Err(Error::EmptyInput)));
        assert!(classify(&[point(3)], 0.0).is_err());
        assert!(classify(&[point(3)], 1.0).is_err());
    }
}
