//! Piecewise-linear segmentation of one-dimensional signals.
//!
//! A signal is optionally mapped to its entropy curve (running sum of
//! absolute increments), cut into maximal straight pieces by a greedy
//! least-squares scan, and each piece is projected to a point of slope-angle
//! / position space where short pieces are flagged as singularities.
//!
//! ```
//! use entroseg::{entropy_transform, segment, piecewise_test_fixture, SegmentationConfig};
//!
//! let s = piecewise_test_fixture();
//! let segs = segment(s.x(), s.y(), &SegmentationConfig::new(0.998)).unwrap();
//! assert_eq!(segs.len(), 4);
//! let e = entropy_transform(&s);
//! assert_eq!(e.h[0], 0.0);
//! ```

pub mod entropy;
pub mod error;
pub mod experiments;
pub mod fbm;
pub mod fitting;
pub mod plot;
pub mod rng;
pub mod segmentation;
pub mod signal;

pub use entropy::{entropy_transform, DiffStats, EntropyCurve, EntropySummary};
pub use error::{Error, Result};
pub use fbm::{
    box_counting_dimension, gen_fbm, gen_piecewise_fbm, variance_scaling_hurst, FbmSpec,
    FractalScan, HurstSchedule, Normalization,
};
pub use fitting::{fit_exponential, ols_line, r_squared, ExpFit, LineFit};
pub use rng::{GaussianStream, RngSeed};
pub use segmentation::{
    classify, segment, to_hough, HoughPoint, LineSegment, SegmentLabel, SegmentationConfig,
    SegmentationReport, Traversal,
};
pub use signal::{piecewise_test_fixture, Signal};

/// The guide's chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/fbm.md")]
    mod fbm {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
