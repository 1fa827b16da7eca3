//! Fit the model to a historical series.
//!
//! Two estimates come out: the scaling function (a mixture fitted by EM on
//! the collapsed returns) and the ensemble exponent (a grid scan matching
//! the volatility-autocorrelation decay, cross-checked by moment scaling).

pub mod em;
pub mod linkage;
pub mod scan;

use serde::{Deserialize, Serialize};

use crate::empirics::autocorr::{fit_power_law_robust, volatility_autocorr};
use crate::empirics::collapse::fit_collapse_exponent;
use crate::empirics::histogram::{empirical_pdf, HistogramConfig};
use crate::empirics::moments::moment_scaling;
use crate::empirics::series::{sliding_returns, DetrendedSeries, ReturnSample};
use crate::error::Result;
use crate::mixture::VolatilityMixture;
use crate::process::RestartPolicy;

pub use em::{fit_scaling_function, EmConfig, MixtureFit};
pub use linkage::{ensemble_mixture, pooled_profile_moments, StageProfile};
pub use scan::{scan_inhomogeneity, ScanConfig, ScanPoint, ScanResult};

/// Full calibration controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Mixture components fitted by EM.
    pub components: usize,
    pub lags: Vec<usize>,
    pub histogram: HistogramConfig,
    pub em: EmConfig,
    pub tau_max: usize,
    pub beta_fit: (usize, usize),
    pub orders: Vec<f64>,
    /// Exponent grid; kept within `(0, 1/2]`.
    pub grid: Vec<f64>,
    /// Seeds per grid point.
    pub seeds: Vec<u64>,
    pub window: usize,
    pub restart_mean: u64,
    pub policy: RestartPolicy,
    pub min_fit_points: usize,
}

impl CalibrationConfig {
    pub fn defaults(base_seed: u64) -> Self {
        Self {
            components: 8,
            lags: vec![1, 2, 4, 8, 16, 32],
            histogram: HistogramConfig::default(),
            em: EmConfig::default(),
            tau_max: 100,
            beta_fit: (2, 100),
            orders: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            grid: (5..=25).map(|i| i as f64 * 0.02).collect(),
            seeds: (0..4).map(|i| base_seed.wrapping_add(i)).collect(),
            window: 100,
            restart_mean: 500,
            policy: RestartPolicy::FromBeginning,
            min_fit_points: 8,
        }
    }

    fn scan_config(&self, sim_length: usize) -> ScanConfig {
        ScanConfig {
            grid: self.grid.clone(),
            seeds: self.seeds.clone(),
            sim_length,
            window: self.window,
            restart_mean: self.restart_mean,
            policy: self.policy,
            beta_fit: self.beta_fit,
            tau_max: self.tau_max,
            lags: self.lags.clone(),
            orders: self.orders.clone(),
            min_fit_points: self.min_fit_points,
        }
    }
}

/// Everything a calibration run produces; reproducible from
/// `(input series, config, seeds)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Collapse exponent of the input series.
    pub d_hat: f64,
    pub collapse_misfit: f64,
    /// Decay exponent measured on the input series (the scan target).
    pub target_beta: f64,
    /// Input moment exponents per order (multiscaling targets).
    pub target_exponents: Vec<f64>,
    pub orders: Vec<f64>,
    /// Mixture fitted on the collapsed input returns.
    pub empirical_mixture: VolatilityMixture,
    pub em_converged: bool,
    pub em_iterations: usize,
    pub em_log_misfit: f64,
    /// Selected ensemble exponent (beta criterion).
    pub selected_d_e: f64,
    pub achieved_beta: f64,
    /// Optimum of the multiscaling criterion.
    pub multiscaling_d_e: f64,
    /// Ensemble mixture at the selected exponent.
    pub ensemble_mixture: VolatilityMixture,
    /// Full scan table.
    pub scan: Vec<ScanPoint>,
    pub beta_fit_range: (usize, usize),
    pub lags: Vec<usize>,
    /// Lags with non-positive autocorrelation excluded from the target fit.
    pub target_excluded_lags: Vec<usize>,
    pub input_length: usize,
    pub seeds: Vec<u64>,
}

/// Calibrate against a detrended series.
pub fn calibrate(series: &DetrendedSeries, cfg: &CalibrationConfig) -> Result<CalibrationReport> {
    let samples: Vec<ReturnSample> = cfg
        .lags
        .iter()
        .map(|&lag| sliding_returns(series, lag))
        .collect::<Result<_>>()?;

    let histograms = samples
        .iter()
        .map(|s| empirical_pdf(s, &cfg.histogram))
        .collect::<Result<Vec<_>>>()?;
    let (d_hat, collapse_misfit) = fit_collapse_exponent(&histograms)?;

    let lag1 = sliding_returns(series, 1)?;
    let curve = volatility_autocorr(&lag1, cfg.tau_max)?;
    let target_fit =
        fit_power_law_robust(&curve, cfg.beta_fit.0, cfg.beta_fit.1, cfg.min_fit_points)?;
    let target_table = moment_scaling(&samples, &cfg.orders)?;

    let fit = fit_scaling_function(&samples, cfg.components, &cfg.histogram, &cfg.em)?;

    let scan_cfg = cfg.scan_config(series.log_prices.len() - 1);
    let scan = scan_inhomogeneity(
        &fit.mixture,
        target_fit.beta,
        Some(&target_table.exponents),
        &scan_cfg,
    )?;

    let ensemble = ensemble_mixture(
        &fit.mixture,
        scan.selected_d_e,
        cfg.restart_mean,
        cfg.policy,
        &cfg.lags,
    )?;

    Ok(CalibrationReport {
        d_hat,
        collapse_misfit,
        target_beta: scan.target_beta,
        target_exponents: target_table.exponents,
        orders: cfg.orders.clone(),
        empirical_mixture: fit.mixture,
        em_converged: fit.converged,
        em_iterations: fit.iterations,
        em_log_misfit: fit.log_misfit,
        selected_d_e: scan.selected_d_e,
        achieved_beta: scan.achieved_beta,
        multiscaling_d_e: scan.multiscaling_d_e.expect("targets were supplied"),
        ensemble_mixture: ensemble,
        scan: scan.points,
        beta_fit_range: cfg.beta_fit,
        lags: cfg.lags.clone(),
        target_excluded_lags: target_fit.excluded,
        input_length: series.log_prices.len(),
        seeds: cfg.seeds.clone(),
    })
}
