//! The stochastic process: configuration, per-epoch state, closed-form
//! joint and conditional densities, and the autoregressive simulator.

pub mod density;
pub mod simulate;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{normal_log_pdf, VolatilityMixture};
use crate::schedule::stage_variance_factor;

pub use density::{conditional_given_abs, conditional_next_pdf, joint_pdf, posterior_weights};
pub use simulate::{restart_schedule, simulate_history, EpochStart};

/// What happens to the coefficient progression at a restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestartPolicy {
    /// Restart from the first stage.
    FromBeginning,
    /// Restart from a stage drawn uniformly from `{2, ..., t_c}`.
    /// Degenerates to the first stage when `t_c < 2`.
    RandomStage,
}

/// Simulator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub mixture: VolatilityMixture,
    /// Ensemble scaling exponent, in `(0, 1]`.
    pub d_e: f64,
    /// Autoregressive window `n`: conditioning uses at most `n - 1` returns.
    pub window: usize,
    /// Mean epoch duration `t_c` in days.
    pub restart_mean: u64,
    pub policy: RestartPolicy,
    pub seed: u64,
}

impl ProcessConfig {
    pub fn new(mixture: VolatilityMixture, d_e: f64, seed: u64) -> Self {
        Self {
            mixture,
            d_e,
            window: 100,
            restart_mean: 500,
            policy: RestartPolicy::FromBeginning,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_e > 0.0 && self.d_e <= 1.0 && self.d_e.is_finite()) {
            return Err(Error::Domain(format!(
                "ensemble exponent {} outside (0, 1]",
                self.d_e
            )));
        }
        if self.window < 2 {
            return Err(Error::Domain(format!(
                "window {} must be at least 2",
                self.window
            )));
        }
        if self.restart_mean < 1 {
            return Err(Error::Domain("restart mean must be at least 1 day".into()));
        }
        Ok(())
    }
}

/// Autoregressive state within one epoch: the stage of the next return, the
/// conditioning window of past `(stage, return)` pairs, and the component
/// log-likelihood accumulators from which the posterior is formed.
#[derive(Debug, Clone)]
pub struct EpochState {
    next_stage: usize,
    history: VecDeque<(usize, f64)>,
    log_lik: Vec<f64>,
}

impl EpochState {
    /// Fresh state at the start of an epoch beginning at `start_stage`.
    pub fn fresh(mixture: &VolatilityMixture, start_stage: usize) -> Self {
        debug_assert!(start_stage >= 1);
        Self {
            next_stage: start_stage,
            history: VecDeque::new(),
            log_lik: vec![0.0; mixture.len()],
        }
    }

    /// Stage index of the next return.
    pub fn stage(&self) -> usize {
        self.next_stage
    }

    /// Conditioning window, oldest first.
    pub fn history(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.history.iter().copied()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Posterior mixture weights given the conditioning window.
    ///
    /// With an empty window this is the prior.
    pub fn posterior(&self, mixture: &VolatilityMixture) -> Vec<f64> {
        let mut log_post: Vec<f64> = mixture
            .components()
            .iter()
            .zip(&self.log_lik)
            .map(|(c, ll)| c.weight.ln() + ll)
            .collect();
        let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for lp in log_post.iter_mut() {
            *lp = (*lp - max).exp();
            sum += *lp;
        }
        for lp in log_post.iter_mut() {
            *lp /= sum;
        }
        log_post
    }

    /// Record the return drawn at the current stage and advance.
    ///
    /// The conditioning window keeps the most recent `window - 1` returns of
    /// the current epoch; likelihood terms of evicted observations are
    /// subtracted so each step costs O(components).
    pub fn observe(&mut self, cfg: &ProcessConfig, value: f64) {
        let stage = self.next_stage;
        for (j, ll) in self.log_lik.iter_mut().enumerate() {
            *ll += component_log_lik(&cfg.mixture, cfg.d_e, j, stage, value);
        }
        self.history.push_back((stage, value));
        while self.history.len() > cfg.window - 1 {
            let (old_stage, old_value) = self.history.pop_front().expect("non-empty");
            for (j, ll) in self.log_lik.iter_mut().enumerate() {
                *ll -= component_log_lik(&cfg.mixture, cfg.d_e, j, old_stage, old_value);
            }
        }
        self.next_stage = stage + 1;
    }
}

/// Log-likelihood of one observed return under component `j` at `stage`.
pub(crate) fn component_log_lik(
    mixture: &VolatilityMixture,
    d_e: f64,
    j: usize,
    stage: usize,
    value: f64,
) -> f64 {
    let scale = mixture.sigma(j) * stage_variance_factor(d_e, stage).sqrt();
    normal_log_pdf(value, scale)
}

/// One simulated history: daily returns plus the epoch structure behind
/// them and the seed that produced everything.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulatedHistory {
    pub returns: Vec<f64>,
    /// Epoch starts, strictly increasing in `day`; the first entry is day 0.
    pub epochs: Vec<EpochStart>,
    pub seed: u64,
}

impl SimulatedHistory {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Epoch index of a given day.
    pub fn epoch_of(&self, day: usize) -> usize {
        match self.epochs.binary_search_by_key(&day, |e| e.day) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Stage index of a given day (the epoch's restart stage advanced by the
    /// days elapsed since the restart).
    pub fn stage_of(&self, day: usize) -> usize {
        let e = &self.epochs[self.epoch_of(day)];
        e.stage + (day - e.day)
    }
}
