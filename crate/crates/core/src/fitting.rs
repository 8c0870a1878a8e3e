//! Least-squares kernels: the affine fit used by the line detector and the
//! `a·exp(b·x)` fit used for the tangent/Hurst relation.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Ordinary least-squares line `y ≈ a·x + b` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub a: f64,
    pub b: f64,
    /// Squared Pearson correlation, clamped to `[0, 1]`.
    pub r2: f64,
    pub mean_abs_error: f64,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Centered second moments of a paired sample.
struct Moments {
    n: usize,
    mx: f64,
    my: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Moments {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Moments {
        n,
        mx,
        my,
        sxx,
        syy,
        sxy,
    }
}

fn check_pair(x: &[f64], y: &[f64], needed: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

fn r2_from(m: &Moments) -> f64 {
    if m.n == 2 && m.sxx > 0.0 {
        return 1.0;
    }
    if m.sxx == 0.0 || m.syy == 0.0 {
        return 0.0;
    }
    (m.sxy * m.sxy / (m.sxx * m.syy)).clamp(0.0, 1.0)
}

pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    check_pair(x, y, 2)?;
    let m = moments(x, y);
    if m.sxx == 0.0 {
        return Err(Error::DegenerateAbscissa);
    }
    let a = m.sxy / m.sxx;
    let b = m.my - a * m.mx;
    let mean_abs_error = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - (a * xi + b)).abs())
        .sum::<f64>()
        / m.n as f64;
    Ok(LineFit {
        a,
        b,
        r2: r2_from(&m),
        mean_abs_error,
    })
}

/// Squared Pearson correlation of `x` and `y`.
///
/// Two points with distinct abscissae score 1. A window with zero variance in
/// `y` (or in `x`) over more than two points scores 0 rather than NaN.
pub fn r_squared(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    Ok(r2_from(&moments(x, y)))
}

/// Result of fitting `y ≈ a·exp(b·x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    /// `1 − SSE/SST`.
    pub r2: f64,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of the SSE gradient at the returned parameters.
    pub grad_norm: f64,
    /// Linearized 95 % confidence intervals for `a` and `b`, when the
    /// covariance estimate exists.
    pub ci95: Option<[(f64, f64); 2]>,
}

impl ExpFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a * (self.b * x).exp()
    }
}

/// Partial derivatives of `a·exp(b·x)` with respect to `(a, b)`.
pub fn exp_model_jacobian(a: f64, b: f64, x: f64) -> [f64; 2] {
    let e = (b * x).exp();
    [e, a * x * e]
}

const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-10;

fn sse_of(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - a * (b * xi).exp();
            r * r
        })
        .sum()
}

/// `JᵀJ` (packed as `[j00, j01, j11]`) and `Jᵀr`.
fn normal_equations(x: &[f64], y: &[f64], a: f64, b: f64) -> ([f64; 3], [f64; 2]) {
    let mut jtj = [0.0; 3];
    let mut jtr = [0.0; 2];
    for (&xi, &yi) in x.iter().zip(y) {
        let [ja, jb] = exp_model_jacobian(a, b, xi);
        let r = yi - a * (b * xi).exp();
        jtj[0] += ja * ja;
        jtj[1] += ja * jb;
        jtj[2] += jb * jb;
        jtr[0] += ja * r;
        jtr[1] += jb * r;
    }
    (jtj, jtr)
}

/// Default starting point: log-linear regression when every `y` is
/// positive, otherwise `(mean(y), 0)`.
fn initial_guess(x: &[f64], y: &[f64]) -> (f64, f64) {
    if y.iter().all(|&v| v > 0.0) {
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        if let Ok(fit) = ols_line(x, &ly) {
            return (fit.b.exp(), fit.a);
        }
    }
    (y.iter().sum::<f64>() / y.len() as f64, 0.0)
}

/// Levenberg–Marquardt fit of `y ≈ a·exp(b·x)`.
///
/// Steps are accepted only when they lower the sum of squares. Iteration
/// stops once the relative improvement falls below 1e-10, the gradient
/// ∞-norm falls below 1e-10, or after 200 iterations; in the last case the
/// best point found is returned inside [`Error::NoConvergence`].
pub fn fit_exponential(x: &[f64], y: &[f64], init: Option<(f64, f64)>) -> Result<ExpFit> {
    check_pair(x, y, 3)?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite sample"));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput("all ordinates are zero"));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateInput("all abscissae are identical"));
    }

    let (mut a, mut b) = init.unwrap_or_else(|| initial_guess(x, y));
    let mut sse = sse_of(x, y, a, b);
    if !sse.is_finite() {
        return Err(Error::DegenerateInput("initial guess overflows"));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        let (jtj, jtr) = normal_equations(x, y, a, b);
        let grad = jtr[0].abs().max(jtr[1].abs()) * 2.0;
        if sse == 0.0 || grad < GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;

        let d0 = jtj[0] * (1.0 + lambda);
        let d1 = jtj[2] * (1.0 + lambda);
        let det = d0 * d1 - jtj[1] * jtj[1];
        if det <= 0.0 || !det.is_finite() {
            lambda *= 10.0;
            continue;
        }
        let da = (d1 * jtr[0] - jtj[1] * jtr[1]) / det;
        let db = (d0 * jtr[1] - jtj[1] * jtr[0]) / det;
        let (na, nb) = (a + da, b + db);
        let nsse = sse_of(x, y, na, nb);

        if nsse.is_finite() && nsse < sse {
            let rel = (sse - nsse) / sse;
            a = na;
            b = nb;
            sse = nsse;
            lambda = (lambda / 10.0).max(1e-15);
            if rel < REL_TOL {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e20 {
                // No descent direction left at working precision.
                converged = true;
                break;
            }
        }
    }

    let (jtj, jtr) = normal_equations(x, y, a, b);
    let grad_norm = jtr[0].abs().max(jtr[1].abs()) * 2.0;
    let n = x.len();
    let my = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse == 0.0 {
        1.0
    } else {
        0.0
    };

    let fit = ExpFit {
        a,
        b,
        r2,
        sse,
        iterations,
        converged,
        grad_norm,
        ci95: confidence_intervals(&jtj, sse, n, a, b),
    };
    if converged {
        Ok(fit)
    } else {
        Err(Error::NoConvergence(Box::new(fit)))
    }
}

fn confidence_intervals(
    jtj: &[f64; 3],
    sse: f64,
    n: usize,
    a: f64,
    b: f64,
) -> Option<[(f64, f64); 2]> {
    let dof = n.checked_sub(2).filter(|&d| d > 0)? as f64;
    let det = jtj[0] * jtj[2] - jtj[1] * jtj[1];
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    let s2 = sse / dof;
    let var_a = s2 * jtj[2] / det;
    let var_b = s2 * jtj[0] / det;
    let t = StudentsT::new(0.0, 1.0, dof).ok()?.inverse_cdf(0.975);
    let ha = t * var_a.sqrt();
    let hb = t * var_b.sqrt();
    Some([(a - ha, a + ha), (b - hb, b + hb)])
}
