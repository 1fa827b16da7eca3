//! Series loading for `analyze` and `calibrate`: accepts either a
//! `date,close` price file or a `day,return,epoch_id,stage` history as
//! written by `simulate`, without any transformation in between.

use std::path::Path;

use anyhow::{bail, Context, Result};

use scalemix::empirics::{detrend, detrend_log_prices, ingest_csv, DetrendedSeries};

pub enum LoadedSeries {
    Prices { detrended: DetrendedSeries, rows: usize },
    History { detrended: DetrendedSeries, rows: usize },
}

impl LoadedSeries {
    pub fn detrended(&self) -> &DetrendedSeries {
        match self {
            LoadedSeries::Prices { detrended, .. } => detrended,
            LoadedSeries::History { detrended, .. } => detrended,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LoadedSeries::Prices { .. } => "prices",
            LoadedSeries::History { .. } => "history",
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            LoadedSeries::Prices { rows, .. } => *rows,
            LoadedSeries::History { rows, .. } => *rows,
        }
    }
}

/// Sniff the header and load accordingly. Histories are integrated into a
/// log-price path first so both inputs go through the identical detrend and
/// sliding-window route.
pub fn load_series(path: &Path) -> Result<LoadedSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();

    if headers.len() >= 2 && headers[0] == "date" && headers[1] == "close" {
        let series = ingest_csv(path)?;
        let rows = series.len();
        let detrended = detrend(&series)?;
        return Ok(LoadedSeries::Prices { detrended, rows });
    }
    if headers.len() >= 2 && headers[0] == "day" && headers[1] == "return" {
        let mut returns = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.with_context(|| format!("reading row {} ", i + 2))?;
            let r: f64 = record[1]
                .parse()
                .with_context(|| format!("bad return {:?} on line {}", &record[1], i + 2))?;
            returns.push(r);
        }
        if returns.is_empty() {
            bail!("history file {} has no rows", path.display());
        }
        let mut log_prices = Vec::with_capacity(returns.len() + 1);
        log_prices.push(0.0);
        let mut acc = 0.0;
        for r in &returns {
            acc += r;
            log_prices.push(acc);
        }
        let rows = returns.len();
        let detrended = detrend_log_prices(&log_prices)?;
        return Ok(LoadedSeries::History { detrended, rows });
    }
    bail!(
        "unrecognized header {:?} in {}: expected \"date,close\" or \"day,return,epoch_id,stage\"",
        headers.join(","),
        path.display()
    );
}
