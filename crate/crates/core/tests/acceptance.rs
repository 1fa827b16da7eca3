//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured values (run with `--nocapture` to see
//! the lines for passing tests).
//!
//! Statistical criteria run at pinned seeds so the suite is deterministic;
//! the asserted bands come from the estimator noise at the configured
//! sample sizes.

use std::sync::OnceLock;
use std::time::Instant;

use scalemix::calibration::{
    calibrate, fit_scaling_function, pooled_profile_moments, CalibrationConfig,
};
use scalemix::empirics::{
    detrend_log_prices, empirical_pdf, fit_collapse_exponent, fit_power_law_robust,
    moment_scaling, sliding_returns, volatility_autocorr, AutocorrCurve, HistogramConfig,
    HistogramPdf,
};
use scalemix::mixture::normal_pdf;
use scalemix::oracle::{invert_cf_2d, InversionGrid};
use scalemix::otimes::otimes_joint_cf;
use scalemix::process::{conditional_next_pdf, simulate_history, EpochState, ProcessConfig};
use scalemix::schedule::{
    inhom_coefficients, interval_width, stage_variance_factor,
};
use scalemix::{RestartPolicy, ScaleVector, VolatilityMixture};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn report(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion:2} ({name}): {} -- {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}

#[test]
fn acceptance_01_coefficient_identities() {
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    for &d_e in &[0.1, 0.24, 0.5, 0.9] {
        let n = 10_000;
        let schedule = inhom_coefficients(d_e, n).unwrap();
        assert_eq!(schedule.coefficient(1), 1.0, "a_1 at D_e {d_e}");
        if (d_e - 0.5).abs() < 1e-15 {
            for i in 1..=n {
                assert_eq!(schedule.coefficient(i), 1.0, "a_{i} at D_e = 1/2");
            }
        }
        let sum: f64 = (1..=n)
            .map(|i| schedule.coefficient(i).powf(2.0 * d_e))
            .sum();
        let expected = (n as f64).powf(2.0 * d_e);
        worst_rel = worst_rel.max((sum / expected - 1.0).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_rel < 1e-10 && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        "coefficient identities",
        pass,
        &format!(
            "worst telescoping rel err {worst_rel:.3e} (tol 1e-10), runtime {:.3}s (limit 1s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn acceptance_02_oracle_equivalence() {
    let start = Instant::now();
    let mix = VolatilityMixture::new(vec![(0.5, 1.0), (0.5, 2.0)]).unwrap();
    let grid = InversionGrid::new(12.0, 101).unwrap();
    let mut worst = 0.0f64;
    for &d_e in &[0.5, 0.24] {
        let scales = ScaleVector::new(vec![
            stage_variance_factor(d_e, 1).sqrt(),
            stage_variance_factor(d_e, 2).sqrt(),
        ])
        .unwrap();
        let table = invert_cf_2d(
            |k1, k2| otimes_joint_cf(&mix, &scales, &[k1, k2]).unwrap(),
            &grid,
        )
        .unwrap();
        let mut sup = 0.0f64;
        for (i, &x1) in table.xs.iter().enumerate() {
            for (j, &x2) in table.xs.iter().enumerate() {
                let exact: f64 = mix
                    .components()
                    .iter()
                    .map(|c| {
                        c.weight
                            * normal_pdf(x1, c.sigma * scales[0])
                            * normal_pdf(x2, c.sigma * scales[1])
                    })
                    .sum();
                sup = sup.max((table.at(i, j) - exact).abs());
            }
        }
        worst = worst.max(sup);
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-6 && elapsed.as_secs_f64() < 30.0;
    report(
        2,
        "oracle equivalence",
        pass,
        &format!(
            "sup error {worst:.3e} on a 101x101 grid (tol 1e-6), runtime {:.1}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn acceptance_03_martingale_and_marginals() {
    // Analytic part: the conditional density is even, so its first moment
    // vanishes identically; verify evenness plus odd-quadrature on a batch
    // of states, then Monte Carlo next-step means over 10^4 states.
    let mix = VolatilityMixture::default_fat_tailed();
    let mut cfg = ProcessConfig::new(mix.clone(), 0.24, 4242);
    cfg.window = 100;
    cfg.restart_mean = 500;
    let history = simulate_history(&cfg, 10_500).unwrap();

    let mut state = EpochState::fresh(&cfg.mixture, history.epochs[0].stage);
    let mut next_epoch = 1usize;
    let mut draw_rng = ChaCha8Rng::seed_from_u64(777);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n_states = 0usize;
    let mut worst_asym = 0.0f64;
    for (day, &r) in history.returns.iter().enumerate() {
        if next_epoch < history.epochs.len() && history.epochs[next_epoch].day == day {
            state = EpochState::fresh(&cfg.mixture, history.epochs[next_epoch].stage);
            next_epoch += 1;
        }
        if n_states < 10_000 {
            // Evenness of the conditional at this state.
            for &x in &[0.004, 0.02] {
                let a = conditional_next_pdf(&cfg, &state, x);
                let b = conditional_next_pdf(&cfg, &state, -x);
                worst_asym = worst_asym.max((a - b).abs());
            }
            // One Monte Carlo draw from the conditional.
            let posterior = state.posterior(&cfg.mixture);
            let u: f64 = draw_rng.gen();
            let mut acc = 0.0;
            let mut j = cfg.mixture.len() - 1;
            for (jj, w) in posterior.iter().enumerate() {
                acc += w;
                if u < acc {
                    j = jj;
                    break;
                }
            }
            let sd =
                cfg.mixture.sigma(j) * stage_variance_factor(cfg.d_e, state.stage()).sqrt();
            let z: f64 = draw_rng.sample(StandardNormal);
            let draw = sd * z;
            sum += draw;
            sum_sq += draw * draw;
            n_states += 1;
        }
        state.observe(&cfg, r);
    }
    assert_eq!(n_states, 10_000);
    let mean = sum / n_states as f64;
    let sd = (sum_sq / n_states as f64 - mean * mean).sqrt();
    let se = sd / (n_states as f64).sqrt();

    // Marginal constraints at the characteristic-function level.
    let scales = ScaleVector::stationary(4, 3.0).unwrap();
    let mix2 = VolatilityMixture::new(vec![(0.5, 1.0), (0.5, 2.0)]).unwrap();
    let mut worst_marginal = 0.0f64;
    for &k in &[0.2, 0.8, 1.7] {
        let patterns: [[f64; 4]; 4] = [
            [k, 0.0, 0.0, 0.0],
            [0.0, k, 0.0, 0.0],
            [k, 0.0, k, 0.0],
            [0.0, k, k, k],
        ];
        for pat in patterns {
            let full = otimes_joint_cf(&mix2, &scales, &pat).unwrap();
            let kept: Vec<f64> = pat.iter().copied().filter(|v| *v != 0.0).collect();
            let sub = ScaleVector::stationary(kept.len(), 3.0).unwrap();
            let reduced = otimes_joint_cf(&mix2, &sub, &kept).unwrap();
            worst_marginal = worst_marginal.max((full - reduced).abs());
        }
    }

    let pass = worst_asym == 0.0 && mean.abs() <= 3.0 * se && worst_marginal <= 1e-14;
    report(
        3,
        "martingale and marginals",
        pass,
        &format!(
            "conditional asymmetry {worst_asym:.1e}, MC mean {mean:.3e} (3 SE = {:.3e}), \
             marginal CF deviation {worst_marginal:.1e} (tol 1e-14)",
            3.0 * se
        ),
    );
}

#[test]
fn acceptance_04_gaussian_reduction() {
    // Product identity of the joint characteristic function.
    let sigma = 0.011;
    let mix = VolatilityMixture::single(sigma).unwrap();
    let mut worst = 0.0f64;
    for n in [2usize, 3, 5] {
        let scales = ScaleVector::stationary(n, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..200 {
            let k: Vec<f64> = (0..n).map(|_| rng.gen_range(-60.0..60.0)).collect();
            let joint = otimes_joint_cf(&mix, &scales, &k).unwrap();
            let product: f64 = k.iter().map(|ki| mix.cf(2.0f64.sqrt() * ki)).product();
            worst = worst.max((joint - product).abs());
        }
    }

    // Simulated returns are i.i.d. normal: Kolmogorov-Smirnov at 1%.
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut cfg = ProcessConfig::new(mix, 0.5, 2024);
    cfg.restart_mean = 500;
    let n_days = 26_000;
    let history = simulate_history(&cfg, n_days).unwrap();
    let mut sorted = history.returns.clone();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut ks = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal.cdf(x);
        let hi = (i + 1) as f64 / n_days as f64;
        let lo = i as f64 / n_days as f64;
        ks = ks.max((f - hi).abs().max((f - lo).abs()));
    }
    let ks_critical = 1.628 / (n_days as f64).sqrt();

    let pass = worst <= 1e-14 && ks < ks_critical;
    report(
        4,
        "gaussian reduction",
        pass,
        &format!(
            "CF product deviation {worst:.1e} (tol 1e-14), KS {ks:.4} vs 1% critical {ks_critical:.4}"
        ),
    );
}

#[test]
fn acceptance_05_volatility_clustering_sign() {
    // Closed form first: Jensen gap of the mixture.
    let mix = VolatilityMixture::new(vec![(0.5, 0.008), (0.5, 0.016)]).unwrap();
    let jensen = mix.fourth_sigma_moment() - mix.variance() * mix.variance();
    assert!(jensen > 0.0);

    // Measured over 10^6 two-day epochs drawn by the sampler machinery,
    // batched for a standard error.
    let cfg = ProcessConfig::new(mix.clone(), 0.5, 31);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let batches = 100usize;
    let per_batch = 10_000usize;
    let mut stats = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut s11 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for _ in 0..per_batch {
            let mut state = EpochState::fresh(&cfg.mixture, 1);
            let r1 = draw_next(&cfg, &state, &mut rng);
            state.observe(&cfg, r1);
            let r2 = draw_next(&cfg, &state, &mut rng);
            s11 += r1 * r1 * r2 * r2;
            s1 += r1 * r1;
            s2 += r2 * r2;
        }
        let n = per_batch as f64;
        stats.push(s11 / n - (s1 / n) * (s2 / n));
    }
    let mean: f64 = stats.iter().sum::<f64>() / batches as f64;
    let var: f64 =
        stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (batches - 1) as f64;
    let se = (var / batches as f64).sqrt();

    let pass = mean > 3.0 * se;
    report(
        5,
        "volatility clustering sign",
        pass,
        &format!(
            "covariance gap {mean:.3e} vs 3 SE {:.3e} over 10^6 pairs (closed form {jensen:.3e})",
            3.0 * se
        ),
    );
}

fn draw_next(cfg: &ProcessConfig, state: &EpochState, rng: &mut ChaCha8Rng) -> f64 {
    let posterior = state.posterior(&cfg.mixture);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut j = cfg.mixture.len() - 1;
    for (jj, w) in posterior.iter().enumerate() {
        acc += w;
        if u < acc {
            j = jj;
            break;
        }
    }
    let sd = cfg.mixture.sigma(j) * stage_variance_factor(cfg.d_e, state.stage()).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    sd * z
}

/// Shared paper-point ensemble: 8 histories at the calibrated operating
/// point, with the per-seed measurements used by criteria 6, 7 and 8.
struct PaperPoint {
    betas: Vec<f64>,
    collapse: Vec<f64>,
    dq4: Vec<f64>,
    dq5: Vec<f64>,
    runtime_s: f64,
}

fn paper_point() -> &'static PaperPoint {
    static POINT: OnceLock<PaperPoint> = OnceLock::new();
    POINT.get_or_init(|| {
        let start = Instant::now();
        let mix = VolatilityMixture::default_fat_tailed();
        let lags = [1usize, 2, 4, 8, 16, 32];
        let mut betas = Vec::new();
        let mut collapse = Vec::new();
        let mut dq4 = Vec::new();
        let mut dq5 = Vec::new();
        for seed in 1..=8u64 {
            let mut cfg = ProcessConfig::new(mix.clone(), 0.24, seed);
            cfg.window = 100;
            cfg.restart_mean = 500;
            cfg.policy = RestartPolicy::FromBeginning;
            let history = simulate_history(&cfg, 26_000).unwrap();

            let mut log_prices = vec![0.0];
            let mut acc = 0.0;
            for r in &history.returns {
                acc += r;
                log_prices.push(acc);
            }
            let detrended = detrend_log_prices(&log_prices).unwrap();
            let lag1 = sliding_returns(&detrended, 1).unwrap();
            let curve: AutocorrCurve = volatility_autocorr(&lag1, 100).unwrap();
            let fit = fit_power_law_robust(&curve, 2, 100, 8).unwrap();
            betas.push(fit.beta);

            let hists: Vec<HistogramPdf> = lags
                .iter()
                .map(|&lag| {
                    let s = sliding_returns(&detrended, lag).unwrap();
                    empirical_pdf(&s, &HistogramConfig::default()).unwrap()
                })
                .collect();
            let (d_hat, _) = fit_collapse_exponent(&hists).unwrap();
            collapse.push(d_hat);

            let samples: Vec<_> = lags
                .iter()
                .map(|&lag| sliding_returns(&detrended, lag).unwrap())
                .collect();
            let table = moment_scaling(&samples, &[4.0, 5.0]).unwrap();
            dq4.push(table.exponents[0] / 4.0);
            dq5.push(table.exponents[1] / 5.0);
        }
        PaperPoint {
            betas,
            collapse,
            dq4,
            dq5,
            runtime_s: start.elapsed().as_secs_f64(),
        }
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn acceptance_06_paper_parameter_point() {
    let point = paper_point();
    let (mean_beta, se) = mean_and_se(&point.betas);
    let pass = (mean_beta - 0.2).abs() <= 0.05 && point.runtime_s < 300.0;
    report(
        6,
        "paper parameter point",
        pass,
        &format!(
            "mean beta over 8 seeds {mean_beta:.3} +- {se:.3} (band 0.2 +- 0.05), \
             per-seed {:?}, ensemble runtime {:.1}s (limit 300s)",
            point
                .betas
                .iter()
                .map(|b| (b * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>(),
            point.runtime_s
        ),
    );
}

#[test]
fn acceptance_07_collapse_of_simulated_pdf() {
    let point = paper_point();
    let (mean_d, se) = mean_and_se(&point.collapse);
    let all_in = point.collapse.iter().all(|&d| (0.45..=0.55).contains(&d));
    let pass = (0.45..=0.55).contains(&mean_d) && all_in;
    report(
        7,
        "collapse of simulated return PDFs",
        pass,
        &format!(
            "collapse exponent {mean_d:.3} +- {se:.3}, per-seed {:?} (band [0.45, 0.55])",
            point
                .collapse
                .iter()
                .map(|d| (d * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn acceptance_08_multiscaling_sign() {
    let point = paper_point();
    let (m4, se4) = mean_and_se(&point.dq4);
    let (m5, se5) = mean_and_se(&point.dq5);
    let pass = m4 + 3.0 * se4 < 0.5 && m5 + 3.0 * se5 < 0.5;
    report(
        8,
        "multiscaling sign",
        pass,
        &format!(
            "D(4)/4 = {m4:.3} +- {se4:.3}, D(5)/5 = {m5:.3} +- {se5:.3}; \
             both must clear 1/2 by 3 SE"
        ),
    );
}

#[test]
fn acceptance_09_effective_dimension() {
    use scalemix::empirics::effective_dimension_curve;
    let ages = [0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0, 10_000.0];
    let curve = effective_dimension_curve(0.24, &ages, (1, 40)).unwrap();
    let at_zero = curve[0].1;
    let monotone = curve.windows(2).all(|w| w[1].1 > w[0].1);
    let at_large = curve.last().unwrap().1;
    let pass = (at_zero - 0.24).abs() < 1e-12 && monotone && (at_large - 0.5).abs() < 0.01;
    report(
        9,
        "effective dimension",
        pass,
        &format!(
            "D_eff(0) = {at_zero:.12} (exact 0.24), monotone {monotone}, \
             D_eff(1e4) = {at_large:.4} (within 0.01 of 1/2)"
        ),
    );
}

#[test]
fn acceptance_10_stationary_negative_control() {
    // The exact stationary process: no restarts within the horizon and a
    // conditioning window longer than the history.
    let mix = VolatilityMixture::default_fat_tailed();
    let n_days = 26_000;
    let mut betas = Vec::new();
    let mut max_cs = Vec::new();
    for seed in 11..=18u64 {
        let mut cfg = ProcessConfig::new(mix.clone(), 0.5, seed);
        cfg.restart_mean = 1_000_000_000;
        cfg.window = n_days + 2;
        let history = simulate_history(&cfg, n_days).unwrap();
        let mut log_prices = vec![0.0];
        let mut acc = 0.0;
        for r in &history.returns {
            acc += r;
            log_prices.push(acc);
        }
        let detrended = detrend_log_prices(&log_prices).unwrap();
        let lag1 = sliding_returns(&detrended, 1).unwrap();
        let curve = volatility_autocorr(&lag1, 100).unwrap();
        if let Ok(fit) = fit_power_law_robust(&curve, 2, 100, 8) {
            betas.push(fit.beta);
        }
        let max_c = curve
            .taus
            .iter()
            .zip(&curve.values)
            .filter(|(&t, _)| t >= 2)
            .map(|(_, c)| c.abs())
            .fold(0.0f64, f64::max);
        max_cs.push(max_c);
    }
    let (mean_beta, se) = mean_and_se(&betas);
    let noise_band = 4.0 / (n_days as f64).sqrt();
    let worst_c = max_cs.iter().cloned().fold(0.0f64, f64::max);
    let beta_zero = mean_beta.abs() <= (3.0 * se).max(0.05);
    let flat = worst_c < noise_band;
    let pass = beta_zero && flat;
    report(
        10,
        "stationary negative control",
        pass,
        &format!(
            "mean beta {mean_beta:.3} +- {se:.3} over {} seeds (|mean| <= max(3 SE, 0.05)), \
             worst |c(tau)| {worst_c:.4} vs noise band {noise_band:.4}",
            betas.len()
        ),
    );
}

#[test]
fn acceptance_11_calibration_round_trip() {
    let start = Instant::now();
    let truth = VolatilityMixture::new(vec![(0.5, 0.008), (0.5, 0.016)]).unwrap();
    let d_e_true = 0.24;
    let mut gen_cfg = ProcessConfig::new(truth.clone(), d_e_true, 4711);
    gen_cfg.window = 100;
    gen_cfg.restart_mean = 500;
    let history = simulate_history(&gen_cfg, 26_000).unwrap();

    let mut log_prices = vec![0.0];
    let mut acc = 0.0;
    for r in &history.returns {
        acc += r;
        log_prices.push(acc);
    }
    let detrended = detrend_log_prices(&log_prices).unwrap();

    let cal_cfg = CalibrationConfig::defaults(9000);
    let report_out = calibrate(&detrended, &cal_cfg).unwrap();

    // Exponent recovery through the beta criterion.
    let d_err = (report_out.selected_d_e - d_e_true).abs();

    // Variance recovery: the fitted mixture carries the stationarized
    // second moment; compare against the generating mixture pushed through
    // the stage profile at the generating exponent. The profile mean is
    // exponentially sensitive to the exponent, so this is where the 10%
    // claim is testable.
    let (mean_v, _) = pooled_profile_moments(
        d_e_true,
        gen_cfg.restart_mean,
        gen_cfg.policy,
        &cal_cfg.lags,
    )
    .unwrap();
    let implied = truth.variance() * mean_v;
    let var_ratio = report_out.empirical_mixture.variance() / implied;

    let elapsed = start.elapsed();
    let pass = d_err <= 0.05 && (var_ratio - 1.0).abs() <= 0.10 && elapsed.as_secs_f64() < 900.0;
    report(
        11,
        "calibration round trip",
        pass,
        &format!(
            "recovered D_e {:.2} (true 0.24, band +-0.05; multiscaling optimum {:.2}), \
             stationarized variance ratio {var_ratio:.3} (band +-0.10), \
             target beta {:.3}, achieved {:.3}, runtime {:.0}s (limit 900s)",
            report_out.selected_d_e,
            report_out.multiscaling_d_e,
            report_out.target_beta,
            report_out.achieved_beta,
            elapsed.as_secs_f64()
        ),
    );
}

/// Variance additivity pins the stationary exponent: equality of
/// `2 T^(2D)` and `(2T)^(2D)` holds only at `D = 1/2`.
#[test]
fn variance_additivity_selects_one_half() {
    for &t in &[1.0f64, 3.0, 10.0] {
        let w_t = interval_width(0.5, 0.0, t).unwrap();
        let w_2t = interval_width(0.5, 0.0, 2.0 * t).unwrap();
        assert!((2.0 * w_t * w_t / (w_2t * w_2t) - 1.0).abs() < 1e-12);
        let w_t = interval_width(0.24, 0.0, t).unwrap();
        let w_2t = interval_width(0.24, 0.0, 2.0 * t).unwrap();
        assert!((2.0 * w_t * w_t / (w_2t * w_2t) - 1.0).abs() > 0.1);
    }
}

/// The EM fit must also reproduce itself: fitting data drawn from the
/// fitted family is the baseline sanity the round trip builds on.
#[test]
fn em_fit_self_consistency_quick() {
    let truth = VolatilityMixture::new(vec![(0.6, 0.007), (0.4, 0.018)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let returns: Vec<f64> = (0..60_000)
        .map(|_| {
            let sigma = if rng.gen::<f64>() < 0.6 { 0.007 } else { 0.018 };
            let z: f64 = rng.sample(StandardNormal);
            sigma * z
        })
        .collect();
    let sample = scalemix::empirics::ReturnSample {
        lag: 1,
        returns,
        rho: 0.0,
    };
    let fit = fit_scaling_function(
        &[sample],
        2,
        &HistogramConfig::default(),
        &scalemix::calibration::EmConfig::default(),
    )
    .unwrap();
    assert!(
        (fit.mixture.variance() / truth.variance() - 1.0).abs() < 0.05,
        "variance {} vs {}",
        fit.mixture.variance(),
        truth.variance()
    );
}
