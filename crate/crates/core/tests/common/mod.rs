#![allow(dead_code)]

use entroseg::fitting::ols_line;
use entroseg::rng::GaussianStream;

/// Whether `[a, b]` would be accepted as one line: two samples always fit,
/// otherwise R² must reach `rm2` or the residual must vanish.
pub fn window_ok(x: &[f64], y: &[f64], a: usize, b: usize, rm2: f64) -> bool {
    if b - a < 2 {
        return true;
    }
    let f = ols_line(&x[a..=b], &y[a..=b]).unwrap();
    f.r2 >= rm2 || f.mean_abs_error == 0.0
}

/// Every segmentation with the smallest number of pieces, as interior
/// breakpoint lists. Pieces share their joint sample.
pub fn minimal_segmentations(x: &[f64], y: &[f64], rm2: f64) -> Vec<Vec<usize>> {
    let n = x.len();
    for k in 1..n {
        let mut sols = Vec::new();
        let mut bps = Vec::new();
        search(x, y, rm2, 0, k, &mut bps, &mut sols);
        if !sols.is_empty() {
            return sols;
        }
    }
    unreachable!("n − 1 two-point pieces always fit")
}

fn search(
    x: &[f64],
    y: &[f64],
    rm2: f64,
    from: usize,
    pieces_left: usize,
    bps: &mut Vec<usize>,
    sols: &mut Vec<Vec<usize>>,
) {
    let last = x.len() - 1;
    if pieces_left == 1 {
        if window_ok(x, y, from, last, rm2) {
            sols.push(bps.clone());
        }
        return;
    }
    for b in from + 1..last {
        if window_ok(x, y, from, b, rm2) {
            bps.push(b);
            search(x, y, rm2, b, pieces_left - 1, bps, sols);
            bps.pop();
        }
    }
}

/// Continuous piecewise-linear signal on the index grid: `n ∈ [4, 12]`,
/// up to three pieces with distinct slope angles on a 10° lattice in
/// `[−80°, 80°]`. Returns the signal and its true breakpoints.
pub fn random_piecewise(g: &mut GaussianStream) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = 4 + (g.uniform() * 9.0) as usize;
    let pieces = 1 + (g.uniform() * 3.0) as usize;
    let mut interior: Vec<usize> = (1..n - 1).collect();
    let mut bps = Vec::new();
    for _ in 1..pieces.min(n - 1) {
        let k = (g.uniform() * interior.len() as f64) as usize;
        bps.push(interior.remove(k));
    }
    bps.sort_unstable();
    let mut angles: Vec<i32> = (-8..=8).map(|a| a * 10).collect();
    let slopes: Vec<f64> = (0..=bps.len())
        .map(|_| {
            let k = (g.uniform() * angles.len() as f64) as usize;
            (angles.remove(k) as f64).to_radians().tan()
        })
        .collect();
    let mut y = vec![0.0; n];
    let mut piece = 0;
    for i in 1..n {
        if piece < bps.len() && i > bps[piece] {
            piece += 1;
        }
        y[i] = y[i - 1] + slopes[piece];
    }
    let x = (0..n).map(|i| i as f64).collect();
    (x, y, bps)
}
