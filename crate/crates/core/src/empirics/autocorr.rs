//! Volatility autocorrelation of daily returns and its power-law exponent.

use serde::{Deserialize, Serialize};

use crate::empirics::series::ReturnSample;
use crate::error::{Error, Result};

/// Autocorrelation of `|r|` at lags `1..=tau_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutocorrCurve {
    pub taus: Vec<usize>,
    pub values: Vec<f64>,
}

impl AutocorrCurve {
    pub fn value_at(&self, tau: usize) -> Option<f64> {
        self.taus
            .iter()
            .position(|&t| t == tau)
            .map(|i| self.values[i])
    }
}

/// Volatility autocorrelation
/// `c(tau) = (sum |r_t||r_{t+tau}| - sum |r_t| sum |r_{t+tau}| / t_max) /
///           (sum |r_t|^2 - (sum |r_t|)^2 / t_max)`,
/// with all sums over the `t_max = len - tau` overlapping pairs.
///
/// The denominator normalizes by the variance of the leading window, so the
/// estimator is exactly one at lag zero and reduces to the textbook
/// autocovariance estimator up to this finite-sample normalization.
pub fn volatility_autocorr(sample: &ReturnSample, tau_max: usize) -> Result<AutocorrCurve> {
    if sample.lag != 1 {
        return Err(Error::Domain(format!(
            "volatility autocorrelation is defined on lag-1 returns, got lag {}",
            sample.lag
        )));
    }
    let len = sample.len();
    if tau_max == 0 || len <= tau_max + 1 {
        return Err(Error::Domain(format!(
            "series of {len} returns is too short for tau_max {tau_max}"
        )));
    }
    let abs: Vec<f64> = sample.returns.iter().map(|r| r.abs()).collect();
    let mut taus = Vec::with_capacity(tau_max);
    let mut values = Vec::with_capacity(tau_max);
    for tau in 1..=tau_max {
        let t_max = len - tau;
        let mut sum_xy = 0.0;
        let mut sum_x = 0.0;
        let mut sum_y = 0.0;
        let mut sum_xx = 0.0;
        for t in 0..t_max {
            let x = abs[t];
            let y = abs[t + tau];
            sum_xy += x * y;
            sum_x += x;
            sum_y += y;
            sum_xx += x * x;
        }
        let n = t_max as f64;
        let num = sum_xy - sum_x * sum_y / n;
        let den = sum_xx - sum_x * sum_x / n;
        taus.push(tau);
        values.push(num / den);
    }
    Ok(AutocorrCurve { taus, values })
}

/// Least-squares decay exponent of `log c` versus `log tau` on
/// `lo..=hi`; reported positive for decay.
///
/// Fails if any autocorrelation value in the range is non-positive (shrink
/// the range or use [`fit_power_law_robust`]).
pub fn fit_power_law(curve: &AutocorrCurve, lo: usize, hi: usize) -> Result<f64> {
    let pts = collect_log_points(curve, lo, hi, true)?;
    Ok(-slope(&pts))
}

/// Power-law fit that excludes non-positive lags instead of failing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustPowerLawFit {
    pub beta: f64,
    /// Lags actually used.
    pub used: usize,
    /// Lags in range excluded for non-positive autocorrelation.
    pub excluded: Vec<usize>,
}

/// Like [`fit_power_law`] but excluding (and reporting) lags with
/// non-positive autocorrelation; errs when fewer than `min_points` remain.
pub fn fit_power_law_robust(
    curve: &AutocorrCurve,
    lo: usize,
    hi: usize,
    min_points: usize,
) -> Result<RobustPowerLawFit> {
    let mut pts = Vec::new();
    let mut excluded = Vec::new();
    for (&tau, &c) in curve.taus.iter().zip(&curve.values) {
        if tau < lo || tau > hi {
            continue;
        }
        if c > 0.0 {
            pts.push(((tau as f64).ln(), c.ln()));
        } else {
            excluded.push(tau);
        }
    }
    if pts.len() < min_points.max(2) {
        return Err(Error::Fit(format!(
            "only {} positive autocorrelation lags in [{lo}, {hi}], need {min_points}",
            pts.len()
        )));
    }
    Ok(RobustPowerLawFit {
        beta: -slope(&pts),
        used: pts.len(),
        excluded,
    })
}

fn collect_log_points(
    curve: &AutocorrCurve,
    lo: usize,
    hi: usize,
    strict: bool,
) -> Result<Vec<(f64, f64)>> {
    if lo < 1 || hi <= lo {
        return Err(Error::Fit(format!("bad fit range [{lo}, {hi}]")));
    }
    let mut pts = Vec::new();
    for (&tau, &c) in curve.taus.iter().zip(&curve.values) {
        if tau < lo || tau > hi {
            continue;
        }
        if c <= 0.0 {
            if strict {
                return Err(Error::Fit(format!(
                    "autocorrelation at tau = {tau} is {c}; shrink the fit range"
                )));
            }
            continue;
        }
        pts.push(((tau as f64).ln(), c.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::Fit("fewer than two usable lags in range".into()));
    }
    Ok(pts)
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
