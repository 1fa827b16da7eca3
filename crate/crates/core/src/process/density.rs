//! Closed-form joint and conditional densities of the process.
//!
//! Because the joint characteristic function is the spherical extension of a
//! Gaussian scale mixture, every finite-dimensional law is itself a mixture:
//! one global component is shared by all returns of an epoch, and given the
//! component the returns are independent zero-mean normals whose variances
//! carry the stage factors. Conditioning therefore reduces to an exact Bayes
//! step on the component weights.

use crate::error::{Error, Result};
use crate::mixture::{normal_pdf, VolatilityMixture};
use crate::process::{component_log_lik, EpochState, ProcessConfig};
use crate::schedule::stage_variance_factor;

fn check_stages(stages: &[usize]) -> Result<()> {
    if stages.is_empty() {
        return Err(Error::Contract("stage list must be non-empty".into()));
    }
    if stages[0] < 1 {
        return Err(Error::Contract("stage indices start at 1".into()));
    }
    for w in stages.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Contract(format!(
                "stage indices must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Joint density of the returns observed at the given stages of one epoch:
/// `sum_j w_j prod_i Normal(r_i; 0, sigma_j^2 a_{s_i}^(2 D_e))`.
pub fn joint_pdf(cfg: &ProcessConfig, stages: &[usize], returns: &[f64]) -> Result<f64> {
    cfg.validate()?;
    check_stages(stages)?;
    if stages.len() != returns.len() {
        return Err(Error::Contract(format!(
            "{} stages but {} returns",
            stages.len(),
            returns.len()
        )));
    }
    // Work in log space per component; the factors span many decades when
    // sigmas or stage factors are small.
    let mut log_terms = Vec::with_capacity(cfg.mixture.len());
    for (j, c) in cfg.mixture.components().iter().enumerate() {
        let mut lt = c.weight.ln();
        for (&stage, &r) in stages.iter().zip(returns) {
            lt += component_log_lik(&cfg.mixture, cfg.d_e, j, stage, r);
        }
        log_terms.push(lt);
    }
    let max = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(log_terms.iter().map(|lt| (lt - max).exp()).sum::<f64>() * max.exp())
}

/// Exact Bayes update of the component weights given observed
/// `(stage, return)` pairs; an empty list returns the prior.
pub fn posterior_weights(cfg: &ProcessConfig, observed: &[(usize, f64)]) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut log_post: Vec<f64> = cfg
        .mixture
        .components()
        .iter()
        .map(|c| c.weight.ln())
        .collect();
    for &(stage, r) in observed {
        if stage < 1 {
            return Err(Error::Contract("stage indices start at 1".into()));
        }
        for (j, lp) in log_post.iter_mut().enumerate() {
            *lp += component_log_lik(&cfg.mixture, cfg.d_e, j, stage, r);
        }
    }
    let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for lp in log_post.iter_mut() {
        *lp = (*lp - max).exp();
        sum += *lp;
    }
    for lp in log_post.iter_mut() {
        *lp /= sum;
    }
    Ok(log_post)
}

/// Density of the next return given the epoch state:
/// `sum_j w'_j Normal(r; 0, sigma_j^2 a_i^(2 D_e))` at the state's stage.
///
/// Even in `r`, so the conditional mean vanishes for every history: the
/// martingale property.
pub fn conditional_next_pdf(cfg: &ProcessConfig, state: &EpochState, r: f64) -> f64 {
    let posterior = state.posterior(&cfg.mixture);
    let v = stage_variance_factor(cfg.d_e, state.stage()).sqrt();
    posterior
        .iter()
        .enumerate()
        .map(|(j, w)| w * normal_pdf(r, cfg.mixture.sigma(j) * v))
        .sum()
}

/// Conditional variance of the next return (exact, from the posterior).
pub fn conditional_next_variance(cfg: &ProcessConfig, state: &EpochState) -> f64 {
    let posterior = state.posterior(&cfg.mixture);
    let v = stage_variance_factor(cfg.d_e, state.stage());
    posterior
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let s = cfg.mixture.sigma(j);
            w * s * s * v
        })
        .sum()
}

/// Stationary two-interval conditional: density of the second return given
/// the magnitude of the first, both over duration `t` days.
///
/// The posterior reweights components by their likelihood of `r1_abs` and
/// the conditional stays a mixture over the same duration.
pub fn conditional_given_abs(
    mix: &VolatilityMixture,
    duration: f64,
    r1_abs: f64,
    r2: f64,
) -> Result<f64> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "duration {duration} must be strictly positive"
        )));
    }
    if !(r1_abs >= 0.0 && r1_abs.is_finite()) {
        return Err(Error::Domain(format!(
            "conditioning magnitude {r1_abs} must be nonnegative"
        )));
    }
    let sqrt_t = duration.sqrt();
    let mut weights: Vec<f64> = mix
        .components()
        .iter()
        .map(|c| c.weight * normal_pdf(r1_abs, c.sigma * sqrt_t))
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Ok(mix
        .components()
        .iter()
        .zip(&weights)
        .map(|(c, w)| w * normal_pdf(r2, c.sigma * sqrt_t))
        .sum())
}

/// Variance of the stationary two-interval conditional.
pub fn conditional_given_abs_variance(
    mix: &VolatilityMixture,
    duration: f64,
    r1_abs: f64,
) -> Result<f64> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "duration {duration} must be strictly positive"
        )));
    }
    let sqrt_t = duration.sqrt();
    let mut num = 0.0;
    let mut den = 0.0;
    for c in mix.components() {
        let w = c.weight * normal_pdf(r1_abs, c.sigma * sqrt_t);
        num += w * c.sigma * c.sigma * duration;
        den += w;
    }
    Ok(num / den)
}
