//! Fractional Brownian motion: exact synthesis, piecewise-Hurst signals and
//! two estimators of roughness (grid box counting and lag-variance scaling).
//!
//! Paths are built by summing fractional Gaussian noise (fGn), the
//! stationary increment sequence with autocovariance
//!
//! ```text
//! γ(k) = ½ (|k−1|^{2H} − 2|k|^{2H} + |k+1|^{2H})
//! ```
//!
//! sampled exactly by circulant embedding (Davies–Harte). If the embedding
//! fails to be non-negative definite, short sequences fall back to a dense
//! Cholesky factorization.

use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{ols_line, LineFit};
use crate::rng::{GaussianStream, RngSeed};
use crate::signal::Signal;

/// Time grid of a synthesized path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `t_k = k / n`: lag-1 increments have variance `v · n^{−2H}`.
    #[default]
    UnitInterval,
    /// `t_k = k`: lag-1 increments have variance `v`.
    UnitStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FbmSpec {
    pub hurst: f64,
    pub n: usize,
    pub variance_scale: f64,
    pub seed: RngSeed,
    pub normalization: Normalization,
}

impl FbmSpec {
    pub fn new(hurst: f64, n: usize, seed: RngSeed) -> Self {
        FbmSpec {
            hurst,
            n,
            variance_scale: 1.0,
            seed,
            normalization: Normalization::UnitInterval,
        }
    }

    pub fn with_variance_scale(mut self, v: f64) -> Self {
        self.variance_scale = v;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        if self.n < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: self.n,
            });
        }
        if !(self.variance_scale > 0.0 && self.variance_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "variance scale must be positive, got {}",
                self.variance_scale
            )));
        }
        Ok(())
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: h,
            domain: "hurst in (0, 1)",
        })
    }
}

/// Autocovariance of unit-variance fGn at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k - 1.0).abs().powf(e) - 2.0 * k.powf(e) + (k + 1.0).powf(e))
}

/// Largest sequence handed to the dense fallback.
pub const CHOLESKY_MAX: usize = 1024;

/// `m` samples of unit-variance fGn.
pub fn fgn(hurst: f64, m: usize, seed: RngSeed) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    let mut g = seed.stream();
    match fgn_circulant(hurst, m, &mut g) {
        Some(v) => Ok(v),
        None if m <= CHOLESKY_MAX => fgn_cholesky(hurst, m, seed),
        None => Err(Error::SynthesisFailure(format!(
            "circulant embedding is not non-negative definite for H={hurst}, m={m}"
        ))),
    }
}

fn fgn_circulant(hurst: f64, m: usize, g: &mut GaussianStream) -> Option<Vec<f64>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let size = 2 * m;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(size);
    for k in 0..=m {
        row.push(Complex::new(fgn_autocovariance(hurst, k), 0.0));
    }
    for k in (1..m).rev() {
        row.push(Complex::new(fgn_autocovariance(hurst, k), 0.0));
    }
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut row);

    let scale = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    if row.iter().any(|c| c.re < -1e-10 * scale) {
        return None;
    }
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|c| {
            let s = (c.re.max(0.0) / size as f64).sqrt();
            let re = g.standard_normal();
            let im = g.standard_normal();
            Complex::new(s * re, s * im)
        })
        .collect();
    fft.process(&mut w);
    Some(w[..m].iter().map(|c| c.re).collect())
}

/// `m` samples of unit-variance fGn by dense Cholesky factorization of the
/// Toeplitz covariance. O(m³); intended for short sequences.
pub fn fgn_cholesky(hurst: f64, m: usize, seed: RngSeed) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    let gamma: Vec<f64> = (0..m).map(|k| fgn_autocovariance(hurst, k)).collect();
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = gamma[i - j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::SynthesisFailure(format!(
                        "covariance not positive definite at row {i}"
                    )));
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut z = vec![0.0; m];
    seed.stream().fill_standard_normal(&mut z);
    Ok((0..m)
        .map(|i| (0..=i).map(|k| l[i * m + k] * z[k]).sum())
        .collect())
}

/// A path with `fbm(0) = 0` and `Var(fbm(t) − fbm(s)) = v·|t − s|^{2H}` on
/// the grid selected by `spec.normalization`.
pub fn gen_fbm(spec: &FbmSpec) -> Result<Signal> {
    spec.validate()?;
    let n = spec.n;
    let step = match spec.normalization {
        Normalization::UnitInterval => 1.0 / n as f64,
        Normalization::UnitStep => 1.0,
    };
    let scale = spec.variance_scale.sqrt() * step.powf(spec.hurst);
    let noise = fgn(spec.hurst, n - 1, spec.seed)?;
    let mut y = Vec::with_capacity(n);
    y.push(0.0);
    let mut acc = 0.0;
    for v in noise {
        acc += scale * v;
        y.push(acc);
    }
    let x = (0..n).map(|k| k as f64 * step).collect();
    Signal::new(x, y)
}

/// Consecutive blocks of fBm with their own Hurst exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstSchedule {
    blocks: Vec<(f64, usize)>,
}

impl HurstSchedule {
    pub fn new(blocks: Vec<(f64, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &(h, len) in &blocks {
            check_hurst(h)?;
            if len < 2 {
                return Err(Error::TooFewPoints {
                    needed: 2,
                    got: len,
                });
            }
        }
        let total: usize = blocks.iter().map(|b| b.1).sum();
        if total < 4 {
            return Err(Error::TooFewPoints {
                needed: 4,
                got: total,
            });
        }
        Ok(HurstSchedule { blocks })
    }

    /// H = 0.3, 0.5, 0.7, 0.9 over 64 samples each.
    pub fn canonical() -> Self {
        HurstSchedule::new(vec![(0.3, 64), (0.5, 64), (0.7, 64), (0.9, 64)])
            .expect("valid schedule")
    }

    pub fn blocks(&self) -> &[(f64, usize)] {
        &self.blocks
    }

    pub fn total_len(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    /// Sample indices where a new block begins (excluding 0).
    pub fn boundaries(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                *acc += b.1;
                Some(*acc)
            })
            .take(self.blocks.len() - 1)
            .collect()
    }
}

/// Parses `"0.3:64,0.5:64"`.
impl FromStr for HurstSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split(',')
            .map(|part| {
                let (h, len) = part.trim().split_once(':').ok_or_else(|| {
                    Error::InvalidConfig(format!("expected hurst:len, got {part:?}"))
                })?;
                let h: f64 = h
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad hurst value {h:?}")))?;
                let len: usize = len
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad block length {len:?}")))?;
                Ok((h, len))
            })
            .collect::<Result<Vec<_>>>()?;
        HurstSchedule::new(blocks)
    }
}

/// Concatenates independently synthesized blocks.
///
/// Block `i` uses seed `seed.derive(i)` and the unit-interval grid of its own
/// length, so its lag-1 increments scale as `len^{−H}`. Each block is shifted
/// so that its first sample equals the previous block's last one. Abscissae
/// are the global sample indices.
pub fn gen_piecewise_fbm(schedule: &HurstSchedule, seed: RngSeed) -> Result<Signal> {
    let mut y: Vec<f64> = Vec::with_capacity(schedule.total_len());
    for (i, &(h, len)) in schedule.blocks().iter().enumerate() {
        let spec = FbmSpec::new(h, len, seed.derive(i as u64));
        let block = gen_fbm(&spec)?;
        let offset = y.last().copied().unwrap_or(0.0);
        y.extend(block.y().iter().map(|v| v + offset));
    }
    Signal::from_values(y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractalScan {
    /// Box sizes in samples.
    pub scales: Vec<usize>,
    pub counts: Vec<f64>,
    /// Fit of `ln C` against `ln r`.
    pub log_fit: LineFit,
    pub dimension: f64,
    pub hurst_est: f64,
}

/// Dyadic box sizes used when none are given: `4, 8, …, n/4` when that
/// leaves at least three scales, otherwise `1, 2, …, n/4`.
pub fn default_box_scales(n: usize) -> Vec<usize> {
    let dyadic = |from: usize| {
        std::iter::successors(Some(from), |r| Some(r * 2))
            .take_while(|&r| r <= n / 4)
            .collect::<Vec<_>>()
    };
    let coarse = dyadic(4);
    if coarse.len() >= 3 {
        coarse
    } else {
        dyadic(1)
    }
}

/// Box-counting dimension of the graph of `s`.
///
/// The graph is mapped onto the unit square (sample index and value range).
/// At box size `r` samples the abscissa is cut into columns of `r` steps,
/// which share their end samples, and each column contributes its value
/// range divided by the box side `ε = r/(n−1)`, i.e. the number of boxes of
/// side `ε` its piece of the curve crosses. The dimension is minus the
/// slope of `ln C(r)` against `ln r`, clamped to `[1, 2]`, and
/// `hurst_est = 2 − D`.
///
/// Range-based counts and the coarse default scales keep the estimator from
/// being pulled towards 1 by sub-sample detail, which a sampled path cannot
/// resolve.
pub fn box_counting_dimension(s: &Signal, scales: Option<&[usize]>) -> Result<FractalScan> {
    let y = s.y();
    let n = y.len();
    if n < 16 {
        return Err(Error::TooFewPoints { needed: 16, got: n });
    }
    let scales = match scales {
        Some(sc) => sc.to_vec(),
        None => default_box_scales(n),
    };
    if scales.len() < 2 {
        return Err(Error::InvalidConfig("need at least two box sizes".into()));
    }
    if scales[0] == 0 || scales.windows(2).any(|w| w[1] <= w[0]) || *scales.last().unwrap() >= n {
        return Err(Error::InvalidConfig(format!(
            "box sizes must be strictly increasing within [1, {}]",
            n - 1
        )));
    }

    let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range <= 0.0 {
        return Err(Error::DegenerateSignal);
    }

    let counts: Vec<f64> = scales
        .iter()
        .map(|&r| {
            let eps = r as f64 / (n - 1) as f64;
            let mut c = 0.0;
            let mut start = 0;
            while start < n - 1 {
                let end = (start + r).min(n - 1);
                let col = &y[start..=end];
                let cmin = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let cmax = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                c += (cmax - cmin) / range / eps;
                start = end;
            }
            c
        })
        .collect();

    let lr: Vec<f64> = scales.iter().map(|&r| (r as f64).ln()).collect();
    let lc: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let log_fit = ols_line(&lr, &lc)?;
    let dimension = (-log_fit.a).clamp(1.0, 2.0);
    Ok(FractalScan {
        scales,
        counts,
        log_fit,
        dimension,
        hurst_est: 2.0 - dimension,
    })
}

pub const DEFAULT_LAGS: [usize; 5] = [1, 2, 4, 8, 16];

/// Hurst exponent from the growth of the lag-ℓ increment variance,
/// `E[(X(t+ℓ) − X(t))²] ∝ ℓ^{2H}`: half the OLS slope in log–log
/// coordinates, clamped to `[0, 1]`.
///
/// The second moment is taken about zero (fBm increments have zero mean);
/// subtracting the sample mean would bias long-memory paths downwards.
pub fn variance_scaling_hurst(s: &Signal, lags: Option<&[usize]>) -> Result<f64> {
    let y = s.y();
    let n = y.len();
    if n < 64 {
        return Err(Error::TooFewPoints { needed: 64, got: n });
    }
    let lags = lags.unwrap_or(&DEFAULT_LAGS);
    if lags.len() < 2 || lags.iter().any(|&l| l == 0 || l >= n - 1) {
        return Err(Error::InvalidConfig(format!(
            "need at least two lags within [1, {}]",
            n - 2
        )));
    }
    let mut lx = Vec::with_capacity(lags.len());
    let mut lv = Vec::with_capacity(lags.len());
    for &l in lags {
        let m2 = y[l..]
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (n - l) as f64;
        if m2 <= 0.0 {
            return Err(Error::DegenerateSignal);
        }
        lx.push((l as f64).ln());
        lv.push(m2.ln());
    }
    let fit = ols_line(&lx, &lv)?;
    Ok((fit.a / 2.0).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        // H=0.75, lag 1: ½(2^{1.5} − 2)
        let want = 0.5 * (2f64.powf(1.5) - 2.0);
        assert!((fgn_autocovariance(0.75, 1) - want).abs() < 1e-15);
        assert!(fgn_autocovariance(0.3, 1) < 0.0);
    }

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        for norm in [Normalization::UnitInterval, Normalization::UnitStep] {
            let spec = FbmSpec::new(0.7, 100, RngSeed(3)).with_normalization(norm);
            let a = gen_fbm(&spec).unwrap();
            assert_eq!(a.y()[0], 0.0);
            assert_eq!(a.len(), 100);
            assert_eq!(a, gen_fbm(&spec).unwrap());
        }
        let ui = gen_fbm(&FbmSpec::new(0.7, 100, RngSeed(3))).unwrap();
        assert!((ui.x()[99] - 0.99).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(gen_fbm(&FbmSpec::new(1.0, 10, RngSeed(0))).is_err());
        assert!(gen_fbm(&FbmSpec::new(0.0, 10, RngSeed(0))).is_err());
        assert!(gen_fbm(&FbmSpec::new(0.5, 1, RngSeed(0))).is_err());
        assert!(gen_fbm(&FbmSpec::new(0.5, 10, RngSeed(0)).with_variance_scale(0.0)).is_err());
        // smallest path: one increment
        assert_eq!(gen_fbm(&FbmSpec::new(0.5, 2, RngSeed(0))).unwrap().len(), 2);
    }

    #[test]
    fn variance_scale_is_applied() {
        let base = gen_fbm(&FbmSpec::new(0.6, 64, RngSeed(8))).unwrap();
        let scaled = gen_fbm(&FbmSpec::new(0.6, 64, RngSeed(8)).with_variance_scale(4.0)).unwrap();
        for (a, b) in base.y().iter().zip(scaled.y()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    /// Empirical lag covariances of both samplers against γ(k).
    #[test]
    fn samplers_match_autocovariance() {
        let h = 0.8;
        let m = 16;
        let trials = 4000;
        let mut acc_c = [0.0; 3];
        let mut acc_d = [0.0; 3];
        for t in 0..trials {
            let c = fgn(h, m, RngSeed(t)).unwrap();
            let d = fgn_cholesky(h, m, RngSeed(100_000 + t)).unwrap();
            for lag in 0..3 {
                acc_c[lag] += c[5] * c[5 + lag];
                acc_d[lag] += d[5] * d[5 + lag];
            }
        }
        for lag in 0..3 {
            let want = fgn_autocovariance(h, lag);
            let got_c = acc_c[lag] / trials as f64;
            let got_d = acc_d[lag] / trials as f64;
            assert!(
                (got_c - want).abs() < 0.06,
                "circulant lag {lag}: {got_c} vs {want}"
            );
            assert!(
                (got_d - want).abs() < 0.06,
                "cholesky lag {lag}: {got_d} vs {want}"
            );
        }
    }

    #[test]
    fn schedule_parsing_and_validation() {
        let s: HurstSchedule = "0.3:64, 0.5:64,0.7:64,0.9:64".parse().unwrap();
        assert_eq!(s, HurstSchedule::canonical());
        assert_eq!(s.total_len(), 256);
        assert_eq!(s.boundaries(), vec![64, 128, 192]);
        assert!("0.3".parse::<HurstSchedule>().is_err());
        assert!("1.2:10".parse::<HurstSchedule>().is_err());
        assert!("0.5:1,0.5:2".parse::<HurstSchedule>().is_err());
        assert!(HurstSchedule::new(vec![(0.5, 3)]).is_err());
        assert!(HurstSchedule::new(vec![]).is_err());
    }

    #[test]
    fn single_block_schedule_equals_plain_path() {
        let sched = HurstSchedule::new(vec![(0.4, 50)]).unwrap();
        let pw = gen_piecewise_fbm(&sched, RngSeed(12)).unwrap();
        let plain = gen_fbm(&FbmSpec::new(0.4, 50, RngSeed(12).derive(0))).unwrap();
        assert_eq!(pw.y(), plain.y());
    }

    #[test]
    fn piecewise_blocks_are_level_matched() {
        let sched = HurstSchedule::canonical();
        let s = gen_piecewise_fbm(&sched, RngSeed(4)).unwrap();
        assert_eq!(s.len(), 256);
        for b in sched.boundaries() {
            // first sample of a block repeats the last one of the previous
            assert_eq!(s.y()[b], s.y()[b - 1]);
        }
    }

    #[test]
    fn straight_line_has_dimension_one() {
        let s = Signal::from_values((0..256).map(|i| i as f64).collect()).unwrap();
        let scan = box_counting_dimension(&s, None).unwrap();
        assert!(
            (scan.dimension - 1.0).abs() <= 0.1,
            "D = {}",
            scan.dimension
        );
        assert_eq!(scan.dimension + scan.hurst_est, 2.0);
        assert!(scan.counts.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn box_counting_errors() {
        let short = Signal::from_values(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            box_counting_dimension(&short, None),
            Err(Error::TooFewPoints { .. })
        ));
        let flat = Signal::from_values(vec![1.0; 32]).unwrap();
        assert!(matches!(
            box_counting_dimension(&flat, None),
            Err(Error::DegenerateSignal)
        ));
        let s = Signal::from_values((0..32).map(|i| (i as f64).sin()).collect()).unwrap();
        assert!(box_counting_dimension(&s, Some(&[4, 2])).is_err());
        assert!(box_counting_dimension(&s, Some(&[4])).is_err());
        assert!(box_counting_dimension(&s, Some(&[1, 2, 4])).is_ok());
    }

    #[test]
    fn default_scales() {
        assert_eq!(default_box_scales(16), vec![1, 2, 4]);
        assert_eq!(default_box_scales(64), vec![4, 8, 16]);
        assert_eq!(default_box_scales(256), vec![4, 8, 16, 32, 64]);
    }

    #[test]
    fn white_noise_has_no_variance_growth() {
        let mut g = RngSeed(21).stream();
        let s = Signal::from_values((0..4096).map(|_| g.standard_normal()).collect()).unwrap();
        let h = variance_scaling_hurst(&s, None).unwrap();
        assert!(h < 0.05, "H = {h}");
    }

    #[test]
    fn variance_scaling_errors() {
        let s = Signal::from_values((0..32).map(|i| i as f64).collect()).unwrap();
        assert!(matches!(
            variance_scaling_hurst(&s, None),
            Err(Error::TooFewPoints { .. })
        ));
        let flat = Signal::from_values(vec![2.0; 80]).unwrap();
        assert!(matches!(
            variance_scaling_hurst(&flat, None),
            Err(Error::DegenerateSignal)
        ));
    }
}
