//! Root finding in the dephasing strength `p`.

use serde::Serialize;

use super::pipeline::{Model, Quantity};
use crate::error::{Error, Result};

/// Upper end of the searched `p` range; `p = 1` itself is never reached in
/// finite time.
pub const P_MAX: f64 = 1.0 - 1e-6;

/// The signal must start above `+CROSSING_MARGIN` and later fall below
/// `-CROSSING_MARGIN` for a crossing to count.
pub const CROSSING_MARGIN: f64 = 1e-9;

/// Uniform coarse `p` points on `[0, P_MAX]` used to bracket crossings.
pub const P_SCAN_POINTS: usize = 64;

pub const MIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bisection,
    GridRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub quantity: String,
    pub bracket: (f64, f64),
    pub root: f64,
    pub method: Method,
    /// Half-width of the final bracket.
    pub achieved_tol: f64,
    /// `f(root)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `2 tol`.
pub fn find_threshold(
    quantity: &str,
    f: impl Fn(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<ThresholdReport> {
    if !(tol >= MIN_TOL) {
        return Err(Error::Parse(format!("tolerance {tol:e} is below {MIN_TOL:e}")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo <= hi) {
        return Err(Error::InvalidGrid(format!("bracket [{lo}, {hi}] is empty")));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    let done = |root: f64, residual: f64, width: f64, iterations: usize| ThresholdReport {
        quantity: quantity.to_string(),
        bracket,
        root,
        method: Method::Bisection,
        achieved_tol: width,
        residual,
        iterations,
    };
    if f_lo == 0.0 {
        return Ok(done(lo, 0.0, 0.0, 0));
    }
    if f_hi == 0.0 {
        return Ok(done(hi, 0.0, 0.0, 0));
    }
    if f_lo * f_hi > 0.0 || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_positive = f_lo > 0.0;
    let mut iterations = 0;
    while 0.5 * (hi - lo) > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(done(mid, 0.0, 0.0, iterations));
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    Ok(done(root, f(root)?, 0.5 * (hi - lo), iterations))
}

/// Uniform `p` grid on `[0, P_MAX]`.
pub fn p_scan_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| P_MAX * i as f64 / (points - 1) as f64).collect()
}

/// Locates the first crossing in a sampled signal. Returns the bracket
/// `(i, j)` of sample indices with `s[i] > 0` and `s[j] < -drop`, or
/// `None` when the signal does not start above `+CROSSING_MARGIN` or never
/// drops.
pub fn first_crossing(signal: &[f64], drop: f64) -> Option<(usize, usize)> {
    if !signal.first().is_some_and(|&s| s > CROSSING_MARGIN) {
        return None;
    }
    let mut last_positive = 0;
    for (j, &s) in signal.iter().enumerate() {
        if s > 0.0 {
            last_positive = j;
        } else if s < -drop {
            return Some((last_positive, j));
        }
    }
    None
}

/// First threshold in `p` of `quantity` at fixed angles, or `None` when the
/// quantity never crosses its level on `[0, P_MAX]`.
pub fn quantity_threshold(
    model: &Model,
    quantity: &Quantity,
    theta: [f64; 4],
    tol: f64,
) -> Result<Option<ThresholdReport>> {
    let signal_at = |p: f64| -> Result<f64> { quantity.signal(model.evaluate_uniform(quantity, p, theta)?) };
    let grid = p_scan_grid(P_SCAN_POINTS);
    let mut samples = Vec::with_capacity(grid.len());
    for &p in &grid {
        samples.push(signal_at(p)?);
        if let Some((i, j)) = first_crossing(&samples, quantity.crossing_drop()) {
            return find_threshold(&quantity.name(), signal_at, (grid[i], grid[j]), tol).map(Some);
        }
    }
    Ok(None)
}
