use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use scalemix::mixture::normal_pdf;
use scalemix::oracle::{invert_cf_1d, invert_cf_2d, InversionGrid};
use scalemix::otimes::otimes_joint_cf;
use scalemix::process::{conditional_given_abs, conditional_next_pdf, posterior_weights,
    EpochState, ProcessConfig};
use scalemix::schedule::{inhom_coefficients, stage_variance_factor};
use scalemix::{ScaleVector, VolatilityMixture};

use crate::config::RunConfig;
use crate::output::{OutDir, Provenance};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    tolerance: f64,
    measured: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SelfcheckSummary {
    #[serde(flatten)]
    provenance: Provenance,
    all_passed: bool,
    checks: Vec<Check>,
}

fn push(checks: &mut Vec<Check>, name: &'static str, tolerance: f64, measured: f64) {
    let pass = measured <= tolerance;
    println!(
        "[{}] {name}: measured {measured:.3e}, tolerance {tolerance:.1e}",
        if pass { "PASS" } else { "FAIL" }
    );
    checks.push(Check {
        name,
        tolerance,
        measured,
        pass,
    });
}

/// Run every oracle and invariant check. `corrupt_telescoping` is a test
/// hook that biases one coefficient so the detector can be seen to fire.
pub fn run(cfg: &RunConfig, out_dir: Option<&Path>, corrupt_telescoping: bool) -> Result<bool> {
    let mut checks = Vec::new();
    let mix2 = VolatilityMixture::new(vec![(0.5, 1.0), (0.5, 2.0)]).expect("valid");

    // Telescoping of the inhomogeneity coefficients.
    {
        let mut worst: f64 = 0.0;
        for &d_e in &[0.1, 0.24, 0.5, 0.9] {
            let n = 10_000;
            let schedule = inhom_coefficients(d_e, n).expect("valid exponent");
            let mut sum: f64 = (1..=n)
                .map(|i| schedule.coefficient(i).powf(2.0 * d_e))
                .sum();
            if corrupt_telescoping {
                sum += 1e-6;
            }
            let expected = (n as f64).powf(2.0 * d_e);
            worst = worst.max((sum / expected - 1.0).abs());
        }
        push(&mut checks, "telescoping", 1e-10, worst);
    }

    // Gaussian reduction: the joint CF factorizes for one component.
    {
        let gauss = VolatilityMixture::single(1.3).expect("valid");
        let scales = ScaleVector::stationary(4, 2.5).expect("valid");
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let k0 = -3.0 + 0.03 * i as f64;
            let k = [k0, 0.5 * k0, -0.25 * k0, 1.1 * k0];
            let joint = otimes_joint_cf(&gauss, &scales, &k).expect("dims agree");
            let product: f64 = k.iter().map(|ki| gauss.cf(2.5f64.sqrt() * ki)).product();
            worst = worst.max((joint - product).abs());
        }
        push(&mut checks, "gaussian-reduction", 1e-14, worst);
    }

    // Marginalization: zeroing wavenumbers drops variables exactly.
    {
        let scales = ScaleVector::stationary(3, 2.0).expect("valid");
        let sub = ScaleVector::stationary(2, 2.0).expect("valid");
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let k = -2.0 + 0.04 * i as f64;
            let full = otimes_joint_cf(&mix2, &scales, &[k, 0.0, 0.7 * k]).expect("dims");
            let reduced = otimes_joint_cf(&mix2, &sub, &[k, 0.7 * k]).expect("dims");
            worst = worst.max((full - reduced).abs());
        }
        push(&mut checks, "marginalization", 1e-14, worst);
    }

    // Aggregation: equal wavenumbers sum the durations.
    {
        let n = 5;
        let duration = 1.5;
        let scales = ScaleVector::stationary(n, duration).expect("valid");
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let k = -2.0 + 0.04 * i as f64;
            let joint = otimes_joint_cf(&mix2, &scales, &vec![k; n]).expect("dims");
            let direct = mix2.cf((n as f64 * duration).sqrt() * k);
            worst = worst.max((joint - direct).abs());
        }
        push(&mut checks, "aggregation", 1e-14, worst);
    }

    // One-dimensional inversion against the exact normal density.
    {
        let grid = InversionGrid::new(8.0, 161).expect("valid");
        let measured = match invert_cf_1d(|k| (-0.5 * k * k).exp(), &grid) {
            Ok(table) => table
                .xs
                .iter()
                .zip(&table.density)
                .map(|(&x, &d)| (d - normal_pdf(x, 1.0)).abs())
                .fold(0.0f64, f64::max),
            Err(_) => f64::INFINITY,
        };
        push(&mut checks, "oracle-1d-gaussian", 1e-8, measured);
    }

    // Two-dimensional inversion of the joint CF against the closed form,
    // stationary and inhomogeneous.
    {
        let grid = InversionGrid::new(12.0, 101).expect("valid");
        let mut worst: f64 = 0.0;
        for &d_e in &[0.5, 0.24] {
            let scales = ScaleVector::new(vec![
                stage_variance_factor(d_e, 1).sqrt(),
                stage_variance_factor(d_e, 2).sqrt(),
            ])
            .expect("valid");
            let sup = match invert_cf_2d(
                |k1, k2| otimes_joint_cf(&mix2, &scales, &[k1, k2]).expect("dims"),
                &grid,
            ) {
                Ok(table) => {
                    let mut sup = 0.0f64;
                    for (i, &x1) in table.xs.iter().enumerate() {
                        for (j, &x2) in table.xs.iter().enumerate() {
                            let exact: f64 = mix2
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
                    sup
                }
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(sup);
        }
        push(&mut checks, "oracle-2d-joint", 1e-6, worst);
    }

    // Conditional law against an oracle slice.
    {
        let duration = 1.0;
        let scales = ScaleVector::stationary(2, duration).expect("valid");
        let grid = InversionGrid::new(12.0, 121).expect("valid");
        let measured = match (
            invert_cf_2d(
                |k1, k2| otimes_joint_cf(&mix2, &scales, &[k1, k2]).expect("dims"),
                &grid,
            ),
            invert_cf_1d(|k| mix2.cf(duration.sqrt() * k), &grid),
        ) {
            (Ok(joint), Ok(marginal)) => {
                let i1 = joint
                    .xs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
                    .expect("non-empty grid")
                    .0;
                let x1 = joint.xs[i1];
                let mut sup = 0.0f64;
                for (i2, &x2) in joint.xs.iter().enumerate() {
                    let numeric = joint.at(i1, i2) / marginal.density[i1];
                    let exact = conditional_given_abs(&mix2, duration, x1.abs(), x2)
                        .expect("valid conditional");
                    sup = sup.max((numeric - exact).abs());
                }
                sup
            }
            _ => f64::INFINITY,
        };
        push(&mut checks, "conditional-oracle-slice", 1e-6, measured);
    }

    // Martingale: exact posterior example and odd-moment quadrature of the
    // conditional density.
    {
        let pc = ProcessConfig::new(mix2.clone(), 0.5, 0);
        let weights = posterior_weights(&pc, &[(1, 0.0)]).expect("valid");
        let posterior_err =
            (weights[0] - 2.0 / 3.0).abs().max((weights[1] - 1.0 / 3.0).abs());

        let mut state = EpochState::fresh(&pc.mixture, 1);
        for r in [0.9, -2.4, 0.2] {
            state.observe(&pc, r);
        }
        let hi = 25.0;
        let n = 4000;
        let h = 2.0 * hi / n as f64;
        let f = |r: f64| r * conditional_next_pdf(&pc, &state, r);
        let mut s = f(-hi) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(-hi + i as f64 * h);
        }
        let odd_moment = (s * h / 3.0).abs();
        push(
            &mut checks,
            "martingale-posterior",
            1e-12,
            posterior_err.max(odd_moment),
        );
    }

    let all_passed = checks.iter().all(|c| c.pass);
    println!(
        "selfcheck: {}/{} checks passed",
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    if let Some(dir) = out_dir {
        let out = OutDir::create(dir)?;
        let summary = SelfcheckSummary {
            provenance: Provenance::new(cfg, None),
            all_passed,
            checks,
        };
        out.write_json("selfcheck.json", &summary)?;
    }
    Ok(all_passed)
}
