//! Seeded studies built on the pipeline: robustness to additive noise, the
//! tangent/Hurst relation on fBm, and damage localization on a beam mode
//! shape.
//!
//! Every trial draws from `seed.derive(..)` streams keyed by its grid
//! position and trial index, so results do not depend on thread scheduling.

mod beam;
mod sweep;
mod tangent;

pub use beam::{
    beam_detection_rate, calibrate_severity, make_beam_fixture, mode_shape, mode_slope,
    run_beam_study, BeamFixture, BeamReport, BEAM_LEN, DAMAGE_IDX, DEFAULT_BEAM_NOISE,
};
pub use sweep::{noise_sweep, SweepResult, SweepRow, SUCCESS_RATE};
pub use tangent::{
    dominant_tangent, tangent_oracle, tangent_vs_hurst, TangentSample, TangentStudy,
};

use crate::error::{Error, Result};
use crate::segmentation::{segment, LineSegment, SegmentationConfig};

/// Median of a nonempty slice (mean of the two central values for even
/// length). NaNs sort last.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Segments `y` on the index grid. Hitting the line cap still yields the
/// carried cover.
fn segment_capped(y: &[f64], cfg: &SegmentationConfig) -> Result<Vec<LineSegment>> {
    let x: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
    match segment(&x, y, cfg) {
        Err(Error::TooManyLines { segments, .. }) => Ok(segments),
        other => other,
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidConfig("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}
