//! Mixture fitting by expectation-maximization on pooled collapsed returns.

use serde::{Deserialize, Serialize};

use crate::empirics::histogram::{empirical_pdf, HistogramConfig, HistogramPdf};
use crate::empirics::series::ReturnSample;
use crate::error::{Error, Result};
use crate::mixture::VolatilityMixture;

/// EM controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Relative log-likelihood change below which iteration stops.
    pub tolerance: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-10,
        }
    }
}

/// Result of a mixture fit. Non-convergence is flagged, not fatal: the
/// best-so-far parameters are always returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureFit {
    pub mixture: VolatilityMixture,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Summed squared log-density misfit against the collapsed histograms.
    pub log_misfit: f64,
}

/// Pool returns from several lags onto the common scale by dividing each
/// lag-T return by `sqrt(T)`.
pub fn pool_collapsed_returns(samples: &[ReturnSample]) -> Vec<f64> {
    let mut pooled = Vec::with_capacity(samples.iter().map(|s| s.len()).sum());
    for s in samples {
        let f = 1.0 / (s.lag as f64).sqrt();
        pooled.extend(s.returns.iter().map(|r| r * f));
    }
    pooled
}

/// Fit a `k`-component zero-mean Gaussian scale mixture to the pooled
/// collapsed returns of `samples`.
///
/// Deterministic: sigmas are initialized on the `|x|` quantile midpoints and
/// weights equally; EM then alternates exact E and M steps. The returned
/// mixture has its weights renormalized to machine precision and components
/// sorted by sigma. The misfit diagnostic compares the fitted log-density
/// against the collapsed histograms of the input.
pub fn fit_scaling_function(
    samples: &[ReturnSample],
    k: usize,
    hist_cfg: &HistogramConfig,
    em: &EmConfig,
) -> Result<MixtureFit> {
    if k == 0 {
        return Err(Error::Fit("component count must be at least 1".into()));
    }
    let pooled = pool_collapsed_returns(samples);
    if pooled.len() < 100 {
        return Err(Error::Fit(format!(
            "EM needs at least 100 pooled returns, got {}",
            pooled.len()
        )));
    }

    let (mut weights, mut sigmas) = initial_parameters(&pooled, k);
    let x2: Vec<f64> = pooled.iter().map(|x| x * x).collect();
    let n = pooled.len() as f64;

    let mut log_lik = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut resp = vec![0.0; k];
    let mut new_w = vec![0.0; k];
    let mut new_m2 = vec![0.0; k];

    for iter in 0..em.max_iterations {
        iterations = iter + 1;
        let log_norm: Vec<f64> = sigmas
            .iter()
            .map(|s| -(s.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln()))
            .collect();
        let log_w: Vec<f64> = weights.iter().map(|w| w.max(1e-300).ln()).collect();
        let inv_2s2: Vec<f64> = sigmas.iter().map(|s| 0.5 / (s * s)).collect();

        new_w.iter_mut().for_each(|v| *v = 0.0);
        new_m2.iter_mut().for_each(|v| *v = 0.0);
        let mut ll = 0.0;
        for &xx in &x2 {
            let mut max_lp = f64::NEG_INFINITY;
            for j in 0..k {
                let lp = log_w[j] + log_norm[j] - xx * inv_2s2[j];
                resp[j] = lp;
                if lp > max_lp {
                    max_lp = lp;
                }
            }
            let mut sum = 0.0;
            for r in resp.iter_mut() {
                *r = (*r - max_lp).exp();
                sum += *r;
            }
            ll += max_lp + sum.ln();
            for j in 0..k {
                let g = resp[j] / sum;
                new_w[j] += g;
                new_m2[j] += g * xx;
            }
        }

        for j in 0..k {
            let nk = new_w[j];
            if nk > 1e-12 {
                sigmas[j] = (new_m2[j] / nk).sqrt().max(1e-300);
            }
            weights[j] = (nk / n).max(1e-15);
        }
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);

        if (ll - log_lik).abs() <= em.tolerance * ll.abs() {
            log_lik = ll;
            converged = true;
            break;
        }
        log_lik = ll;
    }

    // Sort by sigma and renormalize the weights exactly.
    let mut comps: Vec<(f64, f64)> = weights.into_iter().zip(sigmas).collect();
    comps.sort_by(|a, b| a.1.total_cmp(&b.1));
    let wsum: f64 = comps.iter().map(|c| c.0).sum();
    for c in comps.iter_mut() {
        c.0 /= wsum;
    }
    let mixture = VolatilityMixture::new(comps)?;

    let log_misfit = collapsed_log_misfit(samples, &mixture, hist_cfg)?;
    Ok(MixtureFit {
        mixture,
        converged,
        iterations,
        log_likelihood: log_lik,
        log_misfit,
    })
}

/// Sigma init on `|x|` quantile midpoints (scaled by the half-normal
/// median), equal weights.
fn initial_parameters(pooled: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    const HALF_NORMAL_MEDIAN: f64 = 0.6744897501960817;
    let mut abs: Vec<f64> = pooled.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let sigmas: Vec<f64> = (0..k)
        .map(|j| {
            let p = (j as f64 + 0.5) / k as f64;
            let idx = ((p * (abs.len() - 1) as f64).round() as usize).min(abs.len() - 1);
            (abs[idx] / HALF_NORMAL_MEDIAN).max(1e-12)
        })
        .collect();
    (vec![1.0 / k as f64; k], sigmas)
}

/// Summed squared log-density difference between the fitted mixture and the
/// collapsed histograms, over occupied bins.
pub fn collapsed_log_misfit(
    samples: &[ReturnSample],
    mixture: &VolatilityMixture,
    hist_cfg: &HistogramConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for s in samples {
        let f = 1.0 / (s.lag as f64).sqrt();
        let collapsed = ReturnSample {
            lag: s.lag,
            returns: s.returns.iter().map(|r| r * f).collect(),
            rho: s.rho,
        };
        let hist: HistogramPdf = empirical_pdf(&collapsed, hist_cfg)?;
        for (center, &density) in hist.centers().into_iter().zip(&hist.densities) {
            if density > 0.0 {
                let model = mixture.pdf(center);
                let diff = density.ln() - model.ln();
                total += diff * diff;
            }
        }
    }
    Ok(total)
}
