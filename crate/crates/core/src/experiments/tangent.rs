use rayon::prelude::*;
use serde::Serialize;

use super::{check_trials, median, segment_capped};
use crate::entropy::entropy_transform;
use crate::error::{Error, Result};
use crate::fbm::{gen_fbm, FbmSpec};
use crate::fitting::{fit_exponential, ExpFit};
use crate::rng::RngSeed;
use crate::segmentation::SegmentationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentSample {
    pub hurst: f64,
    pub tangent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentStudy {
    pub block_len: usize,
    pub trials: usize,
    pub samples: Vec<TangentSample>,
    /// Median tangent per grid value, in grid order.
    pub medians: Vec<TangentSample>,
    /// `tangent ≈ a·exp(b·H)` over all samples.
    pub fit: ExpFit,
}

/// Slope of the longest segment of `y` on the index grid. The first of
/// equally long segments wins.
pub fn dominant_tangent(y: &[f64], cfg: &SegmentationConfig) -> Result<f64> {
    let segs = segment_capped(y, cfg)?;
    let best = segs
        .iter()
        .reduce(|best, s| {
            if s.length_pts > best.length_pts {
                s
            } else {
                best
            }
        })
        .expect("segmentation is never empty");
    Ok(best.fit.a)
}

/// Expected entropy slope of unit-interval fBm with `n` samples: the mean
/// absolute lag-1 increment, `√(2/π)·n^{−H}`.
pub fn tangent_oracle(hurst: f64, n: usize) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * (n as f64).powf(-hurst)
}

/// For each `H`, synthesizes `trials` unit-interval fBm paths of
/// `block_len` samples (trial `t` of grid point `i` uses
/// `seed.derive(i).derive(t)`), takes the dominant tangent of each entropy
/// curve and fits an exponential through all `(H, tangent)` pairs.
pub fn tangent_vs_hurst(
    h_grid: &[f64],
    block_len: usize,
    trials: usize,
    cfg: &SegmentationConfig,
    seed: RngSeed,
) -> Result<TangentStudy> {
    check_trials(trials)?;
    if h_grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    if block_len < 16 {
        return Err(Error::TooFewPoints {
            needed: 16,
            got: block_len,
        });
    }
    cfg.validate()?;

    let per_h = h_grid
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let spec = FbmSpec::new(h, block_len, seed.derive(i as u64).derive(t as u64));
                    let path = gen_fbm(&spec)?;
                    let e = entropy_transform(&path);
                    dominant_tangent(&e.h, cfg)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let samples: Vec<TangentSample> = h_grid
        .iter()
        .zip(&per_h)
        .flat_map(|(&hurst, ts)| {
            ts.iter()
                .map(move |&tangent| TangentSample { hurst, tangent })
        })
        .collect();
    let medians = h_grid
        .iter()
        .zip(&per_h)
        .map(|(&hurst, ts)| TangentSample {
            hurst,
            tangent: median(ts),
        })
        .collect();

    let hs: Vec<f64> = samples.iter().map(|s| s.hurst).collect();
    let ts: Vec<f64> = samples.iter().map(|s| s.tangent).collect();
    let fit = fit_exponential(&hs, &ts, None)?;
    Ok(TangentStudy {
        block_len,
        trials,
        samples,
        medians,
        fit,
    })
}
