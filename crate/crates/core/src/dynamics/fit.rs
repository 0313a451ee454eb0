//! Ordinary least squares for decay-rate extraction.

use serde::Serialize;

use crate::error::{AwqError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(AwqError::Fit(format!("need at least 3 paired samples, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || !sxx.is_finite() || !syy.is_finite() {
        return Err(AwqError::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
        rms: (ss_res / nf).sqrt(),
        points: n,
    })
}

/// Fit log y against t over samples with t in [lo, hi].
pub fn log_fit(times: &[f64], y: &[f64], lo: f64, hi: f64) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(y)
        .filter(|(t, v)| **t >= lo && **t <= hi && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    linear_fit(&xs, &ys)
}
