//! Small regression helpers for scaling sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// ln y minus the fitted value, per point.
    pub residuals: Vec<f64>,
}

/// Least-squares fit of ln y = slope * ln x + intercept.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 points for a slope".into()));
    }
    if x.iter().chain(y).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::InvalidArgument("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly)?;
    let residuals = lx.iter().zip(&ly).map(|(a, b)| b - (slope * a + intercept)).collect();
    Ok(LogLogFit { slope, intercept, residuals })
}

/// Ordinary least squares y = a x + b, returned as (a, b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

/// Kendall tau-b rank correlation.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            let b = (y[i] - y[j]).partial_cmp(&0.0).map_or(0, |o| o as i64);
            match (a, b) {
                (0, 0) => {}
                (0, _) => tx += 1,
                (_, 0) => ty += 1,
                _ if a == b => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let den = (((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt();
    if den == 0.0 {
        0.0
    } else {
        (conc - disc) as f64 / den
    }
}
