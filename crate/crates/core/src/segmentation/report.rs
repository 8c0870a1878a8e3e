//! Stable JSON/CSV layout of a segmentation run.

use std::io::Write;

use serde::Serialize;

use super::{HoughPoint, LineSegment, SegmentLabel, SegmentationConfig};
use crate::error::Result;
use crate::signal::format_f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentRecord {
    pub start: usize,
    pub end: usize,
    pub a: f64,
    pub b: f64,
    pub r2: f64,
    pub error: f64,
    pub alpha_deg: f64,
    pub length: usize,
    pub position: f64,
    pub label: SegmentLabel,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    #[serde(flatten)]
    pub segmentation: SegmentationConfig,
    pub short_frac: f64,
    pub entropy: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentationReport {
    pub segments: Vec<SegmentRecord>,
    pub config: ReportConfig,
}

impl SegmentationReport {
    pub fn new(
        segments: &[LineSegment],
        labels: &[(HoughPoint, SegmentLabel)],
        cfg: &SegmentationConfig,
        short_frac: f64,
        entropy: bool,
    ) -> Self {
        debug_assert_eq!(segments.len(), labels.len());
        let segments = segments
            .iter()
            .zip(labels)
            .map(|(s, (_, label))| SegmentRecord {
                start: s.start_idx,
                end: s.end_idx,
                a: s.fit.a,
                b: s.fit.b,
                r2: s.fit.r2,
                error: s.fit.mean_abs_error,
                alpha_deg: s.alpha_deg,
                length: s.length_pts,
                position: s.position,
                label: *label,
            })
            .collect();
        SegmentationReport {
            segments,
            config: ReportConfig {
                segmentation: cfg.clone(),
                short_frac,
                entropy,
            },
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "start",
            "end",
            "a",
            "b",
            "r2",
            "error",
            "alpha_deg",
            "length",
            "position",
            "label",
        ])?;
        for s in &self.segments {
            let label = match s.label {
                SegmentLabel::Homogeneous => "homogeneous",
                SegmentLabel::Singularity => "singularity",
            };
            w.write_record([
                s.start.to_string(),
                s.end.to_string(),
                format_f64(s.a),
                format_f64(s.b),
                format_f64(s.r2),
                format_f64(s.error),
                format_f64(s.alpha_deg),
                s.length.to_string(),
                format_f64(s.position),
                label.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
