//! The sampled 1D signal type, its constructors and CSV I/O.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// A validated sampled series: at least two finite samples on a strictly
/// increasing abscissa.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Signal {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Signal {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        validate(&x, &y)?;
        Ok(Signal { x, y })
    }

    /// Samples on the index grid `0, 1, …, n-1`.
    pub fn from_values(y: Vec<f64>) -> Result<Self> {
        let x = (0..y.len()).map(|i| i as f64).collect();
        Signal::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }

    /// Same abscissa, new ordinates.
    pub fn with_values(&self, y: Vec<f64>) -> Result<Self> {
        Signal::new(self.x.clone(), y)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (x, y) = read_xy_csv(reader)?;
        Signal::new(x, y)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_columns(writer, &["x", "y"], &[&self.x, &self.y])
    }
}

/// Checks the [`Signal`] invariants on raw arrays.
pub fn validate(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    for (index, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        if !xi.is_finite() {
            return Err(Error::NonFiniteValue { what: "x", index });
        }
        if !yi.is_finite() {
            return Err(Error::NonFiniteValue { what: "y", index });
        }
    }
    if let Some(index) = x.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotonicAbscissa { index: index + 1 });
    }
    Ok(())
}

/// The three-piece reference function on `[-4, 4]`:
/// `-x` on `[-4, 0]`, `x` on `(0, 2)` and `2 + 3x` on `[2, 4]`.
pub fn eval_piecewise_test_signal(x: f64) -> Result<f64> {
    if !(-4.0..=4.0).contains(&x) {
        return Err(Error::OutOfDomain {
            value: x,
            domain: "[-4, 4]",
        });
    }
    Ok(if x <= 0.0 {
        -x
    } else if x < 2.0 {
        x
    } else {
        2.0 + 3.0 * x
    })
}

/// The 41-sample fixture of [`eval_piecewise_test_signal`] at step 0.2.
///
/// Abscissae are computed as `(k - 20) / 5` so the branch points 0 and 2 are
/// represented exactly.
pub fn piecewise_test_fixture() -> Signal {
    let x: Vec<f64> = (0..41).map(|k| (k as f64 - 20.0) / 5.0).collect();
    let y = x
        .iter()
        .map(|&v| eval_piecewise_test_signal(v).expect("fixture lies inside the domain"))
        .collect();
    Signal::new(x, y).expect("fixture is a valid signal")
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `std`.
pub fn add_gaussian_noise(s: &Signal, std: f64, seed: RngSeed) -> Result<Signal> {
    if !std.is_finite() {
        return Err(Error::NonFiniteValue {
            what: "noise std",
            index: 0,
        });
    }
    if std < 0.0 {
        return Err(Error::OutOfDomain {
            value: std,
            domain: "std >= 0",
        });
    }
    if std == 0.0 {
        return Ok(s.clone());
    }
    let mut g = seed.stream();
    let y = s.y.iter().map(|&v| v + g.normal(0.0, std)).collect();
    s.with_values(y)
}

/// Reads two numeric columns. A first row that does not parse as numbers is
/// treated as a header.
pub fn read_xy_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Csv(format!(
                "row {}: expected 2 columns, found {}",
                row + 1,
                rec.len()
            )));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if row == 0 => continue,
            _ => {
                return Err(Error::Csv(format!(
                    "row {}: cannot parse {:?} as numbers",
                    row + 1,
                    rec.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok((x, y))
}

/// Writes equally long numeric columns with a header line.
pub fn write_columns<W: Write>(writer: W, names: &[&str], cols: &[&[f64]]) -> Result<()> {
    debug_assert_eq!(names.len(), cols.len());
    let n = cols.first().map_or(0, |c| c.len());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names)?;
    for i in 0..n {
        w.write_record(cols.iter().map(|c| format_f64(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that round-trips.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}
