use thiserror::Error;

use crate::fitting::ExpFit;
use crate::segmentation::LineSegment;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x has {x} samples but y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("abscissa is not strictly increasing at sample {index}")]
    NonMonotonicAbscissa { index: usize },

    #[error("non-finite value {what} at sample {index}")]
    NonFiniteValue { what: &'static str, index: usize },

    #[error("{value} lies outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("need at least {needed} samples, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("all abscissae are identical")]
    DegenerateAbscissa,

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("signal has zero range")]
    DegenerateSignal,

    #[error("exponential fit did not converge after {} iterations", .0.iterations)]
    NoConvergence(Box<ExpFit>),

    /// The line cap was reached before the end of the data. The carried
    /// segments still cover the whole signal; the last one absorbs the
    /// remainder without satisfying the acceptance rule.
    #[error("more than {max_lines} lines needed to cover the signal")]
    TooManyLines {
        max_lines: usize,
        segments: Vec<LineSegment>,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fbm synthesis failed: {0}")]
    SynthesisFailure(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
