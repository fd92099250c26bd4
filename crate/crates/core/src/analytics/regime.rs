//! The large-`k` parametrization `r = d/k = (log 2 / 2) 2^k - (1 + log 2)/2 + η`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Upper end of the admissible `η` window, `(1 - log 2)/2`.
pub const ETA_UPPER: f64 = (1.0 - LN_2) / 2.0;

/// Smallest `k` at which the regime flag is raised.
pub const REGIME_MIN_K: usize = 10;

/// Parameters for the analytic layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticParams {
    pub d: u64,
    pub k: usize,
    pub eta: Option<f64>,
    pub precision: usize,
}

impl AnalyticParams {
    /// Parameters with `d` chosen from `η` by [`d_of_eta`].
    pub fn from_eta(k: usize, eta: f64, precision: usize) -> Result<Self> {
        let point = d_of_eta(k, eta)?;
        Ok(AnalyticParams { d: point.d, k, eta: Some(point.eta_implied), precision })
    }
}

fn base(k: usize) -> f64 {
    LN_2 / 2.0 * 2f64.powi(k as i32) - (1.0 + LN_2) / 2.0
}

pub fn r_of_eta(k: usize, eta: f64) -> Result<f64> {
    if !(2..=62).contains(&k) {
        return Err(Error::invalid(format!("k must lie in [2, 62], got {k}")));
    }
    if !eta.is_finite() {
        return Err(Error::invalid("η must be finite"));
    }
    Ok(base(k) + eta)
}

/// `η` implied by an integer degree `d`.
pub fn eta_of_d(k: usize, d: u64) -> f64 {
    d as f64 / k as f64 - base(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePoint {
    pub d: u64,
    pub r: f64,
    /// `η` recomputed from the rounded `d`.
    pub eta_implied: f64,
    /// `η' ∈ (0, (1 - log 2)/2)` and `k >= REGIME_MIN_K`.
    pub valid: bool,
}

/// `d = round(r k)` for the given `η`.
pub fn d_of_eta(k: usize, eta: f64) -> Result<RegimePoint> {
    let r = r_of_eta(k, eta)?;
    let d = (r * k as f64).round();
    if d < 1.0 {
        return Err(Error::domain(format!("η = {eta} gives a non-positive degree at k = {k}")));
    }
    let d = d as u64;
    let eta_implied = eta_of_d(k, d);
    let valid = k >= REGIME_MIN_K && eta_implied > 0.0 && eta_implied < ETA_UPPER;
    Ok(RegimePoint { d, r: d as f64 / k as f64, eta_implied, valid })
}
