use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `ln value = slope · ln scale + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `(ln scale, ln value)`.
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in `ln value`, divided by the spread of
    /// `ln scale` so that it reads as a slope error.
    pub max_residual: f64,
}

/// Fits a power law to `(scale, value)` pairs.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} samples", points.len())));
    }
    let mut samples = Vec::with_capacity(points.len());
    for &(s, v) in points {
        if !(s > 0.0 && v > 0.0 && s.is_finite() && v.is_finite()) {
            return Err(Error::DegenerateFit(format!("non-positive or non-finite sample ({s}, {v})")));
        }
        samples.push((s.ln(), v.ln()));
    }
    fit_logs(samples)
}

/// Same as [`fit_exponent`] on samples that are already logarithms.
pub fn fit_logs(samples: Vec<(f64, f64)>) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} samples", samples.len())));
    }
    let m = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / m;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / m;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.0), hi.max(s.0)));
    let mut xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[1] - w[0] <= 1e-12 * (1.0 + w[0].abs())) {
        return Err(Error::DegenerateFit("repeated scales".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !slope.is_finite() {
        return Err(Error::DegenerateFit("non-finite slope".into()));
    }
    let max_residual = samples
        .iter()
        .map(|s| (s.1 - slope * s.0 - intercept).abs())
        .fold(0.0, f64::max)
        / (hi - lo);
    Ok(ExponentFit {
        samples,
        slope,
        intercept,
        max_residual,
    })
}
