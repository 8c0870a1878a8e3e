//! Entropy of a curve: the running sum of absolute first differences.
//!
//! Over a stretch where the increments `|Δy|` are stationary the curve grows
//! linearly in mean, with slope equal to the mean absolute increment. A
//! change in variability shows up as a change of slope, so any signal becomes
//! (approximately) piecewise linear.
//!
//! The sum runs over sample indices; abscissae are carried along unchanged
//! and are not used to scale the increments.

use serde::Serialize;

use crate::error::Result;
use crate::fitting::ols_line;
use crate::rng::RngSeed;
use crate::signal::{add_gaussian_noise, Signal};

/// Statistics of the absolute increments `|y[i] − y[i−1]|`.
///
/// `std_abs_diff` uses the population (divide-by-count) convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffStats {
    pub mean_abs_diff: f64,
    pub std_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub stats: DiffStats,
}

impl EntropyCurve {
    /// Terminal value, i.e. the total variation of the source.
    pub fn total_variation(&self) -> f64 {
        *self.h.last().expect("entropy curve is never empty")
    }

    /// OLS slope of `h` against the sample index.
    pub fn fitted_slope(&self) -> f64 {
        let idx: Vec<f64> = (0..self.h.len()).map(|i| i as f64).collect();
        ols_line(&idx, &self.h).map(|f| f.a).unwrap_or(0.0)
    }

    /// The curve as a signal on the source abscissa.
    pub fn to_signal(&self) -> Signal {
        Signal::new(self.x.clone(), self.h.clone()).expect("entropy of a valid signal is valid")
    }

    /// The curve as a signal on the index grid `0..n`.
    pub fn to_index_signal(&self) -> Signal {
        Signal::from_values(self.h.clone()).expect("entropy of a valid signal is valid")
    }

    pub fn summary(&self) -> EntropySummary {
        EntropySummary {
            mean_abs_diff: self.stats.mean_abs_diff,
            std_abs_diff: self.stats.std_abs_diff,
            fitted_slope: self.fitted_slope(),
        }
    }
}

/// The JSON stats blob written next to an entropy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySummary {
    pub mean_abs_diff: f64,
    pub std_abs_diff: f64,
    pub fitted_slope: f64,
}

pub fn entropy_transform(s: &Signal) -> EntropyCurve {
    let y = s.y();
    let mut h = Vec::with_capacity(y.len());
    h.push(0.0);
    let mut acc = 0.0;
    let mut sum_sq = 0.0;
    for w in y.windows(2) {
        let d = (w[1] - w[0]).abs();
        acc += d;
        sum_sq += d * d;
        h.push(acc);
    }
    let m = (y.len() - 1) as f64;
    let mean = acc / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    EntropyCurve {
        x: s.x().to_vec(),
        h,
        stats: DiffStats {
            mean_abs_diff: mean,
            std_abs_diff: var.sqrt(),
        },
    }
}

/// Monte-Carlo check that the entropy of white noise is linear in mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMeanReport {
    pub std: f64,
    pub n: usize,
    pub trials: usize,
    /// Mean over trials of `|fitted slope − mean|Δy|| / mean|Δy|`.
    pub mean_gap: f64,
    pub max_gap: f64,
    pub gaps: Vec<f64>,
}

/// Draws `trials` Gaussian white-noise signals of length `n` and compares
/// each entropy curve's fitted slope to its mean absolute increment. A
/// zero-slope curve counts as gap 0.
pub fn entropy_linear_mean_check(
    std: f64,
    n: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<LinearMeanReport> {
    if trials == 0 {
        return Err(crate::Error::InvalidConfig(
            "trials must be at least 1".into(),
        ));
    }
    let base = Signal::from_values(vec![0.0; n])?;
    let gaps = (0..trials)
        .map(|t| {
            let s = add_gaussian_noise(&base, std, seed.derive(t as u64))?;
            let e = entropy_transform(&s);
            let m = e.stats.mean_abs_diff;
            Ok(if m == 0.0 {
                0.0
            } else {
                (e.fitted_slope() - m).abs() / m
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_gap = gaps.iter().sum::<f64>() / trials as f64;
    let max_gap = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(LinearMeanReport {
        std,
        n,
        trials,
        mean_gap,
        max_gap,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_has_flat_entropy() {
        let s = Signal::from_values(vec![3.0; 8]).unwrap();
        let e = entropy_transform(&s);
        assert!(e.h.iter().all(|&v| v == 0.0));
        assert_eq!(e.stats.mean_abs_diff, 0.0);
        assert_eq!(e.stats.std_abs_diff, 0.0);
        assert_eq!(e.fitted_slope(), 0.0);
    }

    #[test]
    fn unit_steps() {
        let s = Signal::from_values(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let e = entropy_transform(&s);
        assert_eq!(e.h, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(e.stats.mean_abs_diff, 1.0);
        assert_eq!(e.stats.std_abs_diff, 0.0);
    }

    #[test]
    fn population_std() {
        // increments 1, 3 → mean 2, population std 1
        let s = Signal::from_values(vec![0.0, 1.0, -2.0]).unwrap();
        let e = entropy_transform(&s);
        assert_eq!(e.stats.mean_abs_diff, 2.0);
        assert!((e.stats.std_abs_diff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_noise_slope_matches_mean_increment() {
        let mut g = RngSeed(2024).stream();
        let y: Vec<f64> = (0..100).map(|_| 0.1 * g.uniform()).collect();
        let e = entropy_transform(&Signal::from_values(y).unwrap());
        let m = e.stats.mean_abs_diff;
        assert!((e.fitted_slope() - m).abs() / m < 0.10);
    }

    #[test]
    fn linear_mean_check_degenerate_and_invalid() {
        let r = entropy_linear_mean_check(0.0, 50, 3, RngSeed(0)).unwrap();
        assert_eq!(r.mean_gap, 0.0);
        assert!(entropy_linear_mean_check(0.1, 50, 0, RngSeed(0)).is_err());
    }

    #[test]
    fn linear_mean_check_large_n() {
        let r = entropy_linear_mean_check(1.0, 1000, 50, RngSeed(5)).unwrap();
        assert!(r.mean_gap <= 0.02, "mean gap {}", r.mean_gap);
    }
}
