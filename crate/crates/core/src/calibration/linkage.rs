//! Link between the sliding-sampled scaling function and the ensemble one.
//!
//! Along a single history the stage of a day is distributed according to the
//! stationary renewal law of the restart process, so the moments of sampled
//! returns mix the ensemble mixture moments with moments of the stage
//! variance factor `v_s = s^(2 D_e) - (s-1)^(2 D_e)`:
//!
//! - second moment: `<r^2> = (sum_j w_j sigma_j^2) E[v]`
//! - fourth moment: `<r^4> = 3 (sum_j w_j sigma_j^4) E[V_T^2]`
//!
//! where `V_T` averages `v` over a window of `T` consecutive days. Inverting
//! these two relations converts a mixture fitted on sliding-sampled returns
//! into the ensemble mixture the simulator needs: the small-argument
//! expansion of the fitted characteristic function pins down that of the
//! ensemble one.
//!
//! Geometric epoch lengths make all the stage moments closed-form sums: the
//! stationary stage law is the age law pushed through the restart-stage
//! distribution, survival across a gap of `tau` days is `(1-p)^tau`
//! independent of age, and on a restart the new age is again stationary.

use crate::error::{Error, Result};
use crate::mixture::VolatilityMixture;
use crate::process::RestartPolicy;
use crate::schedule::stage_variance_factor;

/// Closed-form stage-profile moments at one `(d_e, t_c, policy)` point.
#[derive(Debug, Clone)]
pub struct StageProfile {
    p: f64,
    t_c: u64,
    policy: RestartPolicy,
    /// `P(stage = s)` for `s = 1..`, truncated where the tail is negligible.
    stage_law: Vec<f64>,
    /// `v_s` on the same support.
    v: Vec<f64>,
    /// Stationary mean `E[v]`.
    pub mean_v: f64,
    /// Stationary mean `E[v^2]`.
    pub mean_v2: f64,
}

impl StageProfile {
    pub fn new(d_e: f64, t_c: u64, policy: RestartPolicy) -> Result<Self> {
        if !(d_e > 0.0 && d_e <= 1.0 && d_e.is_finite()) {
            return Err(Error::Domain(format!(
                "ensemble exponent {d_e} outside (0, 1]"
            )));
        }
        if t_c < 1 {
            return Err(Error::Domain("restart mean must be at least 1".into()));
        }
        let p = 1.0 / t_c as f64;
        // Tail (1-p)^s is below 4e-18 at s = 40 t_c.
        let s_max = (40 * t_c as usize).max(64);
        let age_law: Vec<f64> = (1..=s_max)
            .map(|a| p * (1.0 - p).powi(a as i32 - 1))
            .collect();
        let stage_law = match policy {
            RestartPolicy::FromBeginning => age_law.clone(),
            RestartPolicy::RandomStage => {
                if t_c < 2 {
                    age_law.clone()
                } else {
                    // stage = k + age - 1 with k uniform on {2, ..., t_c}.
                    let mut law = vec![0.0; s_max];
                    let kw = 1.0 / (t_c - 1) as f64;
                    for k in 2..=t_c as usize {
                        for (a, &pa) in age_law.iter().enumerate() {
                            let s = k + a; // k + (a+1) - 1, a is 0-based age-1
                            if s > s_max {
                                break;
                            }
                            law[s - 1] += kw * pa;
                        }
                    }
                    law
                }
            }
        };
        let v: Vec<f64> = (1..=s_max)
            .map(|s| stage_variance_factor(d_e, s))
            .collect();
        let mean_v: f64 = stage_law.iter().zip(&v).map(|(q, vv)| q * vv).sum();
        let mean_v2: f64 = stage_law.iter().zip(&v).map(|(q, vv)| q * vv * vv).sum();
        Ok(Self {
            p,
            t_c,
            policy,
            stage_law,
            v,
            mean_v,
            mean_v2,
        })
    }

    /// Stationary pair moment `E[v_t v_{t+tau}]`.
    ///
    /// Split over survival of the current epoch: same-epoch stages `(s, s+tau)`
    /// with probability `(1-p)^tau`, otherwise the newer day's age is at most
    /// `tau` and independent of the older day.
    pub fn pair_mean(&self, tau: usize) -> f64 {
        if tau == 0 {
            return self.mean_v2;
        }
        let survive = (1.0 - self.p).powi(tau as i32);
        let mut same_epoch = 0.0;
        for (i, &q) in self.stage_law.iter().enumerate() {
            if i + tau < self.v.len() {
                same_epoch += q * self.v[i] * self.v[i + tau];
            }
        }
        // Unconditional weight of "age of the newer day <= tau", restricted
        // to the stage law entries reachable with such ages.
        let crossed: f64 = self
            .recent_stage_mass(tau)
            .iter()
            .enumerate()
            .map(|(i, &q)| q * self.v[i])
            .sum();
        survive * same_epoch + self.mean_v * crossed
    }

    /// Stage mass carried by days whose epoch age is at most `tau`.
    fn recent_stage_mass(&self, tau: usize) -> Vec<f64> {
        // Age a occurs with probability p (1-p)^(a-1); the stage is the
        // restart stage advanced by a - 1. FromBeginning keeps stage = age.
        let s_max = self.stage_law.len();
        let mut mass = vec![0.0; s_max];
        let ages: Vec<f64> = (1..=tau)
            .map(|a| self.p * (1.0 - self.p).powi(a as i32 - 1))
            .collect();
        match self.start_weights() {
            None => {
                for (a, &pa) in ages.iter().enumerate() {
                    if a < s_max {
                        mass[a] += pa;
                    }
                }
            }
            Some((k0, kw)) => {
                for k in k0..k0 + kw.len() {
                    for (a, &pa) in ages.iter().enumerate() {
                        let s = k + a;
                        if s <= s_max {
                            mass[s - 1] += kw[k - k0] * pa;
                        }
                    }
                }
            }
        }
        mass
    }

    /// Restart-stage distribution: `None` means the point mass at stage 1.
    fn start_weights(&self) -> Option<(usize, Vec<f64>)> {
        let t_c = self.t_c as usize;
        match self.policy {
            RestartPolicy::FromBeginning => None,
            RestartPolicy::RandomStage if t_c < 2 => None,
            RestartPolicy::RandomStage => {
                Some((2, vec![1.0 / (t_c - 1) as f64; t_c - 1]))
            }
        }
    }

    /// Mean squared window average `E[V_T^2]` for a window of `T` days.
    pub fn window_square_mean(&self, window: usize) -> f64 {
        let t = window as f64;
        let mut acc = window as f64 * self.mean_v2;
        for tau in 1..window {
            acc += 2.0 * (window - tau) as f64 * self.pair_mean(tau);
        }
        acc / (t * t)
    }
}

/// Stage-profile moments pooled over lags with equal weight: the mean of
/// `E[V_T]` (which is `E[v]` for every `T`) and of `E[V_T^2]`.
pub fn pooled_profile_moments(
    d_e: f64,
    t_c: u64,
    policy: RestartPolicy,
    lags: &[usize],
) -> Result<(f64, f64)> {
    if lags.is_empty() {
        return Err(Error::Domain("no lags supplied".into()));
    }
    let profile = StageProfile::new(d_e, t_c, policy)?;
    let mean_v2t = lags
        .iter()
        .map(|&t| profile.window_square_mean(t))
        .sum::<f64>()
        / lags.len() as f64;
    Ok((profile.mean_v, mean_v2t))
}

/// Convert a mixture fitted on sliding-sampled (collapsed) returns into the
/// ensemble mixture consistent with `(d_e, t_c, policy)`.
///
/// Matches the second and fourth sigma-moments through the stage-profile
/// averages by a power-scaling of the sigmas, `sigma -> c sigma^gamma`,
/// solved by bisection. `gamma < 1` thins the tails, which is the usual
/// direction: pooling over stages fattens the sampled distribution relative
/// to the ensemble one.
pub fn ensemble_mixture(
    fitted: &VolatilityMixture,
    d_e: f64,
    t_c: u64,
    policy: RestartPolicy,
    lags: &[usize],
) -> Result<VolatilityMixture> {
    let (mean_v, mean_v2t) = pooled_profile_moments(d_e, t_c, policy, lags)?;
    let m2 = fitted.variance();
    let m4 = fitted.fourth_sigma_moment();
    let a2 = m2 / mean_v;
    let a4 = m4 / mean_v2t;
    // Target log excess; degenerate (Gaussian-like) targets clamp to a
    // near-zero positive value.
    let target = (a4 / (a2 * a2)).max(1.0 + 1e-12).ln();

    let weights: Vec<f64> = fitted.components().iter().map(|c| c.weight).collect();
    let sigmas: Vec<f64> = fitted.components().iter().map(|c| c.sigma).collect();
    let excess = |gamma: f64| -> f64 {
        let e2: f64 = weights
            .iter()
            .zip(&sigmas)
            .map(|(w, s)| w * s.powf(2.0 * gamma))
            .sum();
        let e4: f64 = weights
            .iter()
            .zip(&sigmas)
            .map(|(w, s)| w * s.powf(4.0 * gamma))
            .sum();
        (e4 / (e2 * e2)).ln()
    };

    // excess is increasing in gamma and zero at gamma = 0.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi) < target {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::Fit(
                "moment matching diverged; fitted mixture too close to Gaussian".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let e2: f64 = weights
        .iter()
        .zip(&sigmas)
        .map(|(w, s)| w * s.powf(2.0 * gamma))
        .sum();
    let c = (a2 / e2).sqrt();
    VolatilityMixture::new(
        weights
            .into_iter()
            .zip(sigmas)
            .map(|(w, s)| (w, c * s.powf(gamma)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stationary_exponent_has_unit_profile() {
        let p = StageProfile::new(0.5, 500, RestartPolicy::FromBeginning).unwrap();
        assert_relative_eq!(p.mean_v, 1.0, max_relative = 1e-10);
        assert_relative_eq!(p.mean_v2, 1.0, max_relative = 1e-10);
        assert_relative_eq!(p.pair_mean(7), 1.0, max_relative = 1e-10);
        assert_relative_eq!(p.window_square_mean(16), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn stage_law_is_a_distribution() {
        for policy in [RestartPolicy::FromBeginning, RestartPolicy::RandomStage] {
            let p = StageProfile::new(0.24, 50, policy).unwrap();
            let total: f64 = p.stage_law.iter().sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn profile_moments_match_monte_carlo() {
        // Simulate the stage process directly and compare E[v], E[v^2] and a
        // pair moment against the closed forms.
        use rand::Rng;
        let (d_e, t_c) = (0.24, 50u64);
        let profile = StageProfile::new(d_e, t_c, RestartPolicy::FromBeginning).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4_000_000usize;
        let p = 1.0 / t_c as f64;
        let mut stage = 1usize;
        let mut vs = Vec::with_capacity(n);
        for _ in 0..n {
            vs.push(stage_variance_factor(d_e, stage));
            if rng.gen::<f64>() < p {
                stage = 1;
            } else {
                stage += 1;
            }
        }
        let mv: f64 = vs.iter().sum::<f64>() / n as f64;
        let mv2: f64 = vs.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let tau = 7;
        let pair: f64 = (0..n - tau).map(|i| vs[i] * vs[i + tau]).sum::<f64>()
            / (n - tau) as f64;
        assert_relative_eq!(mv, profile.mean_v, max_relative = 0.01);
        assert_relative_eq!(mv2, profile.mean_v2, max_relative = 0.03);
        assert_relative_eq!(pair, profile.pair_mean(tau), max_relative = 0.03);
    }

    #[test]
    fn random_stage_profile_matches_monte_carlo() {
        use rand::Rng;
        let (d_e, t_c) = (0.3, 40u64);
        let profile = StageProfile::new(d_e, t_c, RestartPolicy::RandomStage).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 4_000_000usize;
        let p = 1.0 / t_c as f64;
        let mut stage = 1usize;
        let mut sum_v = 0.0;
        let mut sum_v2 = 0.0;
        for _ in 0..n {
            let v = stage_variance_factor(d_e, stage);
            sum_v += v;
            sum_v2 += v * v;
            if rng.gen::<f64>() < p {
                stage = rng.gen_range(2..=t_c as usize);
            } else {
                stage += 1;
            }
        }
        assert_relative_eq!(sum_v / n as f64, profile.mean_v, max_relative = 0.01);
        assert_relative_eq!(sum_v2 / n as f64, profile.mean_v2, max_relative = 0.03);
    }

    #[test]
    fn ensemble_correction_is_identity_at_stationarity() {
        let mix = VolatilityMixture::new(vec![(0.5, 1.0), (0.5, 2.0)]).unwrap();
        let out =
            ensemble_mixture(&mix, 0.5, 500, RestartPolicy::FromBeginning, &[1, 2, 4]).unwrap();
        for (a, b) in mix.components().iter().zip(out.components()) {
            assert_relative_eq!(a.sigma, b.sigma, max_relative = 1e-6);
            assert_relative_eq!(a.weight, b.weight, max_relative = 1e-12);
        }
    }

    #[test]
    fn ensemble_correction_matches_target_moments() {
        // A decisively fat fitted mixture keeps the fourth-moment target
        // feasible at this profile point.
        let fitted = VolatilityMixture::new(vec![(0.9, 0.005), (0.1, 0.05)]).unwrap();
        let (d_e, t_c) = (0.24, 500u64);
        let lags = [1usize, 2, 4, 8, 16, 32];
        let out =
            ensemble_mixture(&fitted, d_e, t_c, RestartPolicy::FromBeginning, &lags).unwrap();
        let (mean_v, mean_v2t) =
            pooled_profile_moments(d_e, t_c, RestartPolicy::FromBeginning, &lags).unwrap();
        let a2 = fitted.variance() / mean_v;
        let a4 = fitted.fourth_sigma_moment() / mean_v2t;
        assert!(a4 / (a2 * a2) > 1.0, "target must be feasible for this test");
        assert_relative_eq!(out.variance(), a2, max_relative = 1e-9);
        assert_relative_eq!(out.fourth_sigma_moment(), a4, max_relative = 1e-6);
    }

    #[test]
    fn infeasible_fourth_moment_clamps_to_near_gaussian() {
        // A nearly Gaussian fitted mixture asks for ensemble kurtosis below
        // the Gaussian floor; the correction collapses the sigmas instead
        // and still matches the variance exactly.
        let fitted = VolatilityMixture::new(vec![(0.5, 0.0100), (0.5, 0.0101)]).unwrap();
        let (d_e, t_c) = (0.2, 500u64);
        let lags = [1usize, 2, 4, 8, 16, 32];
        let out =
            ensemble_mixture(&fitted, d_e, t_c, RestartPolicy::FromBeginning, &lags).unwrap();
        let (mean_v, _) =
            pooled_profile_moments(d_e, t_c, RestartPolicy::FromBeginning, &lags).unwrap();
        assert_relative_eq!(
            out.variance(),
            fitted.variance() / mean_v,
            max_relative = 1e-9
        );
        let spread = out.components()[out.len() - 1].sigma / out.components()[0].sigma;
        assert!(spread < 1.0001, "sigmas should collapse, spread {spread}");
    }
}
