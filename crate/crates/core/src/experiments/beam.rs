//! Synthetic damaged-cantilever mode shapes.
//!
//! The undamaged shape is the first bending mode of a clamped-free beam,
//!
//! ```text
//! φ(z) = cosh βz − cos βz − σ (sinh βz − sin βz),   σ = (cosh β + cos β)/(sinh β + sin β)
//! ```
//!
//! with `β = 1.8751…` the first root of `1 + cos β cosh β = 0` and
//! `z ∈ [0, 1]` from the clamp. Damage at `z_d` is a hinge-like kink: beyond
//! `z_d` the shape gains `severity · φ′(z_d) · (z − z_d)`, a jump of
//! relative size `severity` in the slope.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_trials, median};
use crate::entropy::entropy_transform;
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::segmentation::{
    classify, to_hough, HoughPoint, LineSegment, SegmentLabel, SegmentationConfig,
    SegmentationReport, DEFAULT_SHORT_FRAC,
};
use crate::signal::{add_gaussian_noise, Signal};

pub const BEAM_LEN: usize = 60;
pub const DAMAGE_IDX: usize = 20;
/// Measurement noise std used by the seeded studies, relative to a unit
/// peak deflection.
pub const DEFAULT_BEAM_NOISE: f64 = 1e-4;

const BETA: f64 = 1.875_104_068_711_961_1;

fn sigma() -> f64 {
    (BETA.cosh() + BETA.cos()) / (BETA.sinh() + BETA.sin())
}

pub fn mode_shape(z: f64) -> f64 {
    let b = BETA * z;
    b.cosh() - b.cos() - sigma() * (b.sinh() - b.sin())
}

/// `dφ/dz`.
pub fn mode_slope(z: f64) -> f64 {
    let b = BETA * z;
    BETA * (b.sinh() + b.sin() - sigma() * (b.cosh() - b.cos()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamFixture {
    /// Deflection on the index grid `0..60`, scaled to a peak of 1.
    pub signal: Signal,
    pub damage_idx: usize,
    pub severity: f64,
    pub noise_std: f64,
}

/// Samples the damaged mode at `z_k = k/59`, normalizes the peak to 1 and,
/// when `seed` is given, adds Gaussian noise of std `noise_std`.
///
/// `severity = 0` is the undamaged control.
pub fn make_beam_fixture(
    severity: f64,
    noise_std: f64,
    seed: Option<RngSeed>,
) -> Result<BeamFixture> {
    if !(0.0..1.0).contains(&severity) {
        return Err(Error::OutOfDomain {
            value: severity,
            domain: "severity in [0, 1)",
        });
    }
    let zd = DAMAGE_IDX as f64 / (BEAM_LEN - 1) as f64;
    let kink = severity * mode_slope(zd);
    let mut y: Vec<f64> = (0..BEAM_LEN)
        .map(|k| {
            let z = k as f64 / (BEAM_LEN - 1) as f64;
            mode_shape(z) + if z > zd { kink * (z - zd) } else { 0.0 }
        })
        .collect();
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    y.iter_mut().for_each(|v| *v /= peak);
    let mut signal = Signal::from_values(y)?;
    let noise_std = match seed {
        Some(seed) => {
            signal = add_gaussian_noise(&signal, noise_std, seed)?;
            noise_std
        }
        None => 0.0,
    };
    Ok(BeamFixture {
        signal,
        damage_idx: DAMAGE_IDX,
        severity,
        noise_std,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamReport {
    pub severity: f64,
    pub noise_std: f64,
    pub damage_idx: usize,
    #[serde(flatten)]
    pub segmentation: SegmentationReport,
    pub hough: Vec<HoughPoint>,
    #[serde(skip)]
    pub lines: Vec<LineSegment>,
    /// Whether the line cap was hit; the last segment is then the remainder.
    pub capped: bool,
    /// `(start, end)` of singular segments between the first and last
    /// homogeneous ones.
    pub interior_singularities: Vec<(usize, usize)>,
    /// Smallest distance from an interior singular boundary to the damage.
    pub damage_distance: Option<usize>,
    /// Median length of segments whose midpoint lies before the damage.
    pub median_len_before: Option<f64>,
    pub median_len_after: Option<f64>,
}

impl BeamReport {
    /// The damage counts as localized when an interior singularity has a
    /// boundary within two samples of it.
    pub fn localized(&self) -> bool {
        self.damage_distance.is_some_and(|d| d <= 2)
    }
}

/// Entropy, segmentation on the index grid, Hough projection and
/// classification of a beam fixture.
pub fn run_beam_study(fx: &BeamFixture, cfg: &SegmentationConfig) -> Result<BeamReport> {
    if fx.damage_idx == 0 || fx.damage_idx + 1 >= fx.signal.len() {
        return Err(Error::InvalidConfig(format!(
            "damage index {} outside the interior",
            fx.damage_idx
        )));
    }
    cfg.validate()?;
    let e = entropy_transform(&fx.signal);
    let x: Vec<f64> = (0..e.h.len()).map(|i| i as f64).collect();
    let (segments, capped) = match crate::segmentation::segment(&x, &e.h, cfg) {
        Ok(s) => (s, false),
        Err(Error::TooManyLines { segments, .. }) => (segments, true),
        Err(err) => return Err(err),
    };
    let hough = to_hough(&segments)?;
    let labels = classify(&hough, DEFAULT_SHORT_FRAC)?;
    let is_singular: Vec<bool> = labels
        .iter()
        .map(|(_, l)| *l == SegmentLabel::Singularity)
        .collect();

    let first = is_singular.iter().position(|s| !s);
    let last = is_singular.iter().rposition(|s| !s);
    let interior_singularities: Vec<(usize, usize)> = match (first, last) {
        (Some(f), Some(l)) => (f..=l)
            .filter(|&k| is_singular[k])
            .map(|k| (segments[k].start_idx, segments[k].end_idx))
            .collect(),
        _ => Vec::new(),
    };
    let d = fx.damage_idx;
    let damage_distance = interior_singularities
        .iter()
        .flat_map(|&(s, e)| [s.abs_diff(d), e.abs_diff(d)])
        .min();

    let side_median = |before: bool| {
        let lens: Vec<f64> = segments
            .iter()
            .filter(|s| ((s.start_idx + s.end_idx) as f64 / 2.0 < d as f64) == before)
            .map(|s| s.length_pts as f64)
            .collect();
        (!lens.is_empty()).then(|| median(&lens))
    };

    Ok(BeamReport {
        severity: fx.severity,
        noise_std: fx.noise_std,
        damage_idx: d,
        median_len_before: side_median(true),
        median_len_after: side_median(false),
        segmentation: SegmentationReport::new(&segments, &labels, cfg, DEFAULT_SHORT_FRAC, true),
        hough,
        lines: segments,
        capped,
        interior_singularities,
        damage_distance,
    })
}

/// Fraction of `seeds` noisy fixtures (seed `seed.derive(k)`) whose damage
/// is localized.
pub fn beam_detection_rate(
    severity: f64,
    noise_std: f64,
    seeds: usize,
    cfg: &SegmentationConfig,
    seed: RngSeed,
) -> Result<f64> {
    check_trials(seeds)?;
    let hits = (0..seeds)
        .into_par_iter()
        .map(|k| {
            let fx = make_beam_fixture(severity, noise_std, Some(seed.derive(k as u64)))?;
            Ok(run_beam_study(&fx, cfg)?.localized())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / seeds as f64)
}

/// Smallest severity in `grid` localized in at least 90% of `seeds` noisy
/// fixtures.
pub fn calibrate_severity(
    grid: &[f64],
    noise_std: f64,
    seeds: usize,
    cfg: &SegmentationConfig,
    seed: RngSeed,
) -> Result<Option<f64>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "severity grid must be strictly increasing".into(),
        ));
    }
    for &s in grid {
        if beam_detection_rate(s, noise_std, seeds, cfg, seed)? >= 0.9 {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
