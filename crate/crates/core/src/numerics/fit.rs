use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Least-squares line through `(ln n, ln err)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_loglog(points: &[(u64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return invalid(format!("log-log fit needs at least 2 points, got {}", points.len()));
    }
    for (i, &(n, err)) in points.iter().enumerate() {
        if n == 0 {
            return invalid("log-log fit needs n >= 1");
        }
        if !(err > 0.0) || !err.is_finite() {
            return invalid(format!("log-log fit needs positive finite errors, got {err} at n = {n}"));
        }
        if points[..i].iter().any(|&(m, _)| m == n) {
            return invalid(format!("duplicate abscissa n = {n} in log-log fit"));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, residuals })
}
