use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use scalemix::calibration::{calibrate, CalibrationConfig, CalibrationReport};
use scalemix::empirics::HistogramConfig;

use crate::config::RunConfig;
use crate::input::load_series;
use crate::output::{fmt, OutDir, Provenance};

#[derive(Serialize)]
struct CalibrateSummary {
    #[serde(flatten)]
    provenance: Provenance,
    input: String,
    input_kind: &'static str,
    report: CalibrationReport,
    config: RunConfig,
}

pub fn run(cfg: &RunConfig, input: &Path, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let seed = seed.unwrap_or(cfg.calibrate.seed);
    let loaded = load_series(input)?;

    let mut cal = CalibrationConfig::defaults(seed);
    cal.components = cfg.calibrate.components;
    cal.lags = cfg.analyze.lags.clone();
    cal.histogram = HistogramConfig {
        bins: cfg.analyze.bins,
        span_sigmas: cfg.analyze.span_sigmas,
    };
    cal.tau_max = cfg.analyze.tau_max;
    cal.beta_fit = (cfg.analyze.beta_fit[0], cfg.analyze.beta_fit[1]);
    cal.orders = cfg.analyze.orders.clone();
    cal.grid = cfg.exponent_grid();
    cal.seeds = (0..cfg.calibrate.seeds_per_point as u64)
        .map(|i| seed.wrapping_add(i))
        .collect();
    cal.window = cfg.process.window;
    cal.restart_mean = cfg.process.restart_mean;
    cal.policy = cfg.process.policy;

    let report = calibrate(loaded.detrended(), &cal)?;

    let out = OutDir::create(out_dir)?;
    {
        let mut writer = out.csv_writer("scan.csv")?;
        writer.write_record([
            "d_e",
            "mean_beta",
            "beta_spread",
            "multiscaling_distance",
            "fit_count",
        ])?;
        for p in &report.scan {
            writer.write_record([
                fmt(p.d_e),
                p.mean_beta.map(fmt).unwrap_or_default(),
                p.beta_spread.map(fmt).unwrap_or_default(),
                p.multiscaling_distance.map(fmt).unwrap_or_default(),
                p.betas.len().to_string(),
            ])?;
        }
        writer.flush()?;
    }

    println!(
        "calibrated {}: D_hat = {:.3}, selected D_e = {:.2} (multiscaling {:.2}), \
         target beta {:.3}, achieved {:.3}, mixture variance {:.3e}",
        input.display(),
        report.d_hat,
        report.selected_d_e,
        report.multiscaling_d_e,
        report.target_beta,
        report.achieved_beta,
        report.ensemble_mixture.variance()
    );
    let summary = CalibrateSummary {
        provenance: Provenance::new(cfg, Some(seed)),
        input: input.display().to_string(),
        input_kind: loaded.kind(),
        report,
        config: cfg.clone(),
    };
    out.write_json("calibration.json", &summary)?;
    Ok(())
}
