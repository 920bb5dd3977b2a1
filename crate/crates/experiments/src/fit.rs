//! Least-squares fits for decay and growth rates.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope x + intercept`; `None` with fewer than two
/// points, non-finite data or a degenerate abscissa.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<Fit> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(Fit { slope, intercept, r2 })
}

/// Fit of `ln y` against `ln x`; skipped when any value is not positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<Fit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Fit of `ln y` against `x`.
pub fn semilog_fit(x: &[f64], y: &[f64]) -> Option<Fit> {
    if y.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(x, &ly)
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// `m` geometrically spaced points on `[lambda, ratio * lambda)`.
pub fn relative_window(lambda: f64, ratio: f64, m: usize) -> Vec<f64> {
    (0..m).map(|j| lambda * ratio.powf(j as f64 / m as f64)).collect()
}
