use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use scalemix::process::{simulate_history, ProcessConfig};

use crate::config::RunConfig;
use crate::output::{fmt, OutDir, Provenance};

#[derive(Serialize)]
struct SimulateSummary {
    #[serde(flatten)]
    provenance: Provenance,
    length: usize,
    epoch_count: usize,
    mean: f64,
    variance: f64,
    history_file: String,
    config: RunConfig,
}

pub fn run(cfg: &RunConfig, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let seed = seed.unwrap_or(cfg.simulate.seed);
    if cfg.simulate.length == 0 {
        bail!("invalid field [simulate].length: must be at least 1");
    }
    let mut process = ProcessConfig::new(cfg.mixture.build()?, cfg.process.d_e, seed);
    process.window = cfg.process.window;
    process.restart_mean = cfg.process.restart_mean;
    process.policy = cfg.process.policy;
    process
        .validate()
        .context("invalid field in [process] section")?;

    let history = simulate_history(&process, cfg.simulate.length)?;

    let out = OutDir::create(out_dir)?;
    let mut writer = out.csv_writer("history.csv")?;
    writer.write_record(["day", "return", "epoch_id", "stage"])?;
    for (day, r) in history.returns.iter().enumerate() {
        writer.write_record([
            day.to_string(),
            fmt(*r),
            history.epoch_of(day).to_string(),
            history.stage_of(day).to_string(),
        ])?;
    }
    writer.flush()?;

    let n = history.len() as f64;
    let mean: f64 = history.returns.iter().sum::<f64>() / n;
    let variance: f64 =
        history.returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let summary = SimulateSummary {
        provenance: Provenance::new(cfg, Some(seed)),
        length: history.len(),
        epoch_count: history.epochs.len(),
        mean,
        variance,
        history_file: "history.csv".into(),
        config: cfg.clone(),
    };
    out.write_json("simulate_summary.json", &summary)?;
    println!(
        "simulated {} days, {} epochs, mean {mean:.3e}, variance {variance:.3e} -> {}",
        history.len(),
        history.epochs.len(),
        out.path("history.csv").display()
    );
    Ok(())
}
