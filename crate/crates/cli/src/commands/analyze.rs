use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use scalemix::empirics::{
    effective_dimension_curve, empirical_pdf, fit_collapse_exponent, fit_power_law_robust,
    moment_scaling, sliding_returns, volatility_autocorr, HistogramConfig, HistogramPdf,
};

use crate::config::RunConfig;
use crate::input::load_series;
use crate::output::{fmt, OutDir, Provenance};

#[derive(Serialize)]
struct OrderExponent {
    q: f64,
    exponent: f64,
}

#[derive(Serialize)]
struct AnalyzeSummary {
    #[serde(flatten)]
    provenance: Provenance,
    input: String,
    input_kind: &'static str,
    input_rows: usize,
    rho: f64,
    d_hat: f64,
    collapse_misfit: f64,
    beta: f64,
    beta_fit_range: [usize; 2],
    beta_lags_used: usize,
    beta_excluded_lags: Vec<usize>,
    d_q: Vec<OrderExponent>,
    lags: Vec<usize>,
    files: Vec<String>,
    config: RunConfig,
}

pub fn run(cfg: &RunConfig, input: &Path, out_dir: &Path) -> Result<()> {
    let a = &cfg.analyze;
    let loaded = load_series(input)?;
    let detrended = loaded.detrended();
    let n_prices = detrended.log_prices.len();
    for &lag in &a.lags {
        if lag + 1 >= n_prices {
            bail!(
                "series too short: lag {lag} needs more than {} price points, got {n_prices}",
                lag + 1
            );
        }
    }
    if n_prices <= a.tau_max + 2 {
        bail!(
            "series too short: tau_max {} needs more than {} price points, got {n_prices}",
            a.tau_max,
            a.tau_max + 2
        );
    }

    let hist_cfg = HistogramConfig {
        bins: a.bins,
        span_sigmas: a.span_sigmas,
    };
    let out = OutDir::create(out_dir)?;
    let mut files = Vec::new();

    // Histograms per lag.
    let mut samples = Vec::new();
    let mut histograms: Vec<HistogramPdf> = Vec::new();
    {
        let mut writer = out.csv_writer("histograms.csv")?;
        writer.write_record(["lag", "bin_lo", "bin_hi", "density", "count"])?;
        for &lag in &a.lags {
            let sample = sliding_returns(detrended, lag)?;
            let hist = empirical_pdf(&sample, &hist_cfg)?;
            for (pair, d) in hist.edges.windows(2).zip(&hist.densities) {
                writer.write_record([
                    lag.to_string(),
                    fmt(pair[0]),
                    fmt(pair[1]),
                    fmt(*d),
                    hist.count.to_string(),
                ])?;
            }
            histograms.push(hist);
            samples.push(sample);
        }
        writer.flush()?;
        files.push("histograms.csv".into());
    }

    let (d_hat, collapse_misfit) = fit_collapse_exponent(&histograms)?;

    // Volatility autocorrelation and its decay exponent.
    let lag1 = sliding_returns(detrended, 1)?;
    let curve = volatility_autocorr(&lag1, a.tau_max)?;
    {
        let mut writer = out.csv_writer("autocorr.csv")?;
        writer.write_record(["tau", "c"])?;
        for (&tau, &c) in curve.taus.iter().zip(&curve.values) {
            writer.write_record([tau.to_string(), fmt(c)])?;
        }
        writer.flush()?;
        files.push("autocorr.csv".into());
    }
    let beta_fit = fit_power_law_robust(&curve, a.beta_fit[0], a.beta_fit[1], 8)
        .context("power-law fit over the configured range")?;

    // Moment table.
    let table = moment_scaling(&samples, &a.orders)?;
    {
        let mut writer = out.csv_writer("moments.csv")?;
        writer.write_record(["q", "lag", "moment"])?;
        for (qi, &q) in table.orders.iter().enumerate() {
            for (ti, &lag) in table.lags.iter().enumerate() {
                writer.write_record([fmt(q), lag.to_string(), fmt(table.moments[qi][ti])])?;
            }
        }
        writer.flush()?;
        files.push("moments.csv".into());
    }

    // Effective dimension of the configured process exponent.
    let deff = effective_dimension_curve(
        cfg.process.d_e,
        &a.deff_ages,
        (a.deff_duration_range[0], a.deff_duration_range[1]),
    )?;
    {
        let mut writer = out.csv_writer("deff.csv")?;
        writer.write_record(["age", "d_eff"])?;
        for &(t, d) in &deff {
            writer.write_record([fmt(t), fmt(d)])?;
        }
        writer.flush()?;
        files.push("deff.csv".into());
    }

    let summary = AnalyzeSummary {
        provenance: Provenance::new(cfg, None),
        input: input.display().to_string(),
        input_kind: loaded.kind(),
        input_rows: loaded.rows(),
        rho: detrended.rho,
        d_hat,
        collapse_misfit,
        beta: beta_fit.beta,
        beta_fit_range: a.beta_fit,
        beta_lags_used: beta_fit.used,
        beta_excluded_lags: beta_fit.excluded,
        d_q: table
            .orders
            .iter()
            .zip(&table.exponents)
            .map(|(&q, &exponent)| OrderExponent { q, exponent })
            .collect(),
        lags: a.lags.clone(),
        files,
        config: cfg.clone(),
    };
    out.write_json("analyze_summary.json", &summary)?;
    println!(
        "analyzed {} ({} rows): D_hat = {d_hat:.3}, beta = {:.3}, D(q)/q = {:?}",
        input.display(),
        loaded.rows(),
        beta_fit.beta,
        summary
            .d_q
            .iter()
            .map(|oe| ((oe.exponent / oe.q) * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );
    Ok(())
}
