//! Restart schedule and the autoregressive sampler.
//!
//! Epoch lengths are geometric with mean `t_c` (the memoryless law for a
//! mean-specified integer waiting time), so restarts arrive like unforecast
//! external events. Each step draws a mixture component from the running
//! posterior and then a normal return at that component's stage scale; this
//! ancestral scheme samples the joint law exactly for epochs shorter than
//! the window, and truncates the conditioning set to the latest `n - 1`
//! returns otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::process::{EpochState, ProcessConfig, RestartPolicy, SimulatedHistory};
use crate::schedule::stage_variance_factor;

/// Start of one epoch: the day of the restart and the stage the coefficient
/// progression resumes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochStart {
    pub day: usize,
    pub stage: usize,
}

/// Geometric epoch length with mean `t_c` (support `1, 2, ...`).
fn geometric_gap(rng: &mut impl Rng, t_c: u64) -> usize {
    if t_c <= 1 {
        return 1;
    }
    let p = 1.0 / t_c as f64;
    let u: f64 = rng.gen();
    // Inverse CDF of the geometric law on {1, 2, ...}.
    let gap = ((1.0 - u).ln() / (1.0 - p).ln()).floor() as usize + 1;
    gap.max(1)
}

fn restart_stage(rng: &mut impl Rng, t_c: u64, policy: RestartPolicy) -> usize {
    match policy {
        RestartPolicy::FromBeginning => 1,
        RestartPolicy::RandomStage => {
            if t_c < 2 {
                1
            } else {
                rng.gen_range(2..=t_c as usize)
            }
        }
    }
}

/// Draw the epoch boundaries covering `length` days.
///
/// The first epoch always starts on day 0 at stage 1; later entries record
/// where the progression was interrupted and restarted.
pub fn restart_schedule(
    rng: &mut impl Rng,
    length: usize,
    t_c: u64,
    policy: RestartPolicy,
) -> Vec<EpochStart> {
    let mut epochs = vec![EpochStart { day: 0, stage: 1 }];
    let mut day = geometric_gap(rng, t_c);
    while day < length {
        epochs.push(EpochStart {
            day,
            stage: restart_stage(rng, t_c, policy),
        });
        day += geometric_gap(rng, t_c);
    }
    epochs
}

/// Draw one component index from normalized weights.
fn sample_component(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.len() - 1
}

/// Simulate `length` daily returns.
///
/// Deterministic in `(config, seed)`: the restart schedule and the return
/// draws use separate streams of a counter-based generator, so the epoch
/// structure does not depend on how many returns were drawn before it.
pub fn simulate_history(cfg: &ProcessConfig, length: usize) -> Result<SimulatedHistory> {
    cfg.validate()?;
    if length == 0 {
        return Err(crate::error::Error::Domain(
            "history length must be at least 1".into(),
        ));
    }

    let mut schedule_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    schedule_rng.set_stream(0);
    let epochs = restart_schedule(&mut schedule_rng, length, cfg.restart_mean, cfg.policy);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);

    let mut returns = Vec::with_capacity(length);
    let mut next_epoch = 1usize;
    let mut state = EpochState::fresh(&cfg.mixture, epochs[0].stage);
    for day in 0..length {
        if next_epoch < epochs.len() && epochs[next_epoch].day == day {
            state = EpochState::fresh(&cfg.mixture, epochs[next_epoch].stage);
            next_epoch += 1;
        }
        // Conditioning never crosses an epoch boundary.
        debug_assert!(state.history_len() < cfg.window);

        let posterior = state.posterior(&cfg.mixture);
        let j = sample_component(&mut rng, &posterior);
        let sd = cfg.mixture.sigma(j) * stage_variance_factor(cfg.d_e, state.stage()).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        let r = sd * z;
        state.observe(cfg, r);
        returns.push(r);
    }

    Ok(SimulatedHistory {
        returns,
        epochs,
        seed: cfg.seed,
    })
}
