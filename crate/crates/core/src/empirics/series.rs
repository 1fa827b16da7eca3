//! Price-series ingestion, detrending and sliding-window returns.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestProblem, Result};

/// Ingested daily closes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
    pub source: String,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// Log-prices with the per-day drift removed, ready for return sampling.
#[derive(Debug, Clone)]
pub struct DetrendedSeries {
    pub log_prices: Vec<f64>,
    /// Removed average per-day log growth.
    pub rho: f64,
}

/// Overlapping lag-T returns of a detrended series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnSample {
    pub lag: usize,
    pub returns: Vec<f64>,
    /// Drift that was removed upstream, echoed for provenance.
    pub rho: f64,
}

impl ReturnSample {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Read a `date,close` CSV (header required, ISO dates).
///
/// Every offending row is collected and reported with its line number:
/// unparsable fields, non-positive closes, and non-increasing dates.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Ingest {
            path: display.clone(),
            problems: vec![IngestProblem {
                line: 0,
                reason: e.to_string(),
            }],
        })?;

    let mut problems = Vec::new();
    {
        let headers = reader.headers().map_err(|e| Error::Ingest {
            path: display.clone(),
            problems: vec![IngestProblem {
                line: 1,
                reason: e.to_string(),
            }],
        })?;
        let cols: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if cols.len() < 2 || cols[0] != "date" || cols[1] != "close" {
            problems.push(IngestProblem {
                line: 1,
                reason: format!("expected header \"date,close\", got \"{}\"", cols.join(",")),
            });
        }
    }

    let mut dates = Vec::new();
    let mut closes = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                problems.push(IngestProblem {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if record.len() < 2 || record.iter().all(|f| f.is_empty()) {
            problems.push(IngestProblem {
                line,
                reason: "missing fields".into(),
            });
            continue;
        }
        let date = match NaiveDate::parse_from_str(&record[0], "%Y-%m-%d") {
            Ok(d) => d,
            Err(e) => {
                problems.push(IngestProblem {
                    line,
                    reason: format!("bad date {:?}: {e}", &record[0]),
                });
                continue;
            }
        };
        let close: f64 = match record[1].parse() {
            Ok(c) => c,
            Err(e) => {
                problems.push(IngestProblem {
                    line,
                    reason: format!("bad close {:?}: {e}", &record[1]),
                });
                continue;
            }
        };
        if !(close > 0.0 && close.is_finite()) {
            problems.push(IngestProblem {
                line,
                reason: format!("close {close} must be strictly positive"),
            });
            continue;
        }
        if let Some(&prev) = dates.last() {
            if date <= prev {
                problems.push(IngestProblem {
                    line,
                    reason: format!("date {date} not after previous date {prev}"),
                });
                continue;
            }
        }
        dates.push(date);
        closes.push(close);
    }

    if !problems.is_empty() {
        return Err(Error::Ingest {
            path: display,
            problems,
        });
    }
    Ok(PriceSeries {
        dates,
        closes,
        source: display,
    })
}

/// Detrend raw log-prices: subtract `rho * t` where `rho` is the endpoint
/// slope `(x_last - x_first) / (len - 1)`.
///
/// This choice makes the detrended lag-1 returns sum to zero exactly.
pub fn detrend_log_prices(log_prices: &[f64]) -> Result<DetrendedSeries> {
    if log_prices.len() < 2 {
        return Err(Error::Domain(
            "detrending needs at least two observations".into(),
        ));
    }
    let n = log_prices.len();
    let rho = (log_prices[n - 1] - log_prices[0]) / (n - 1) as f64;
    let detrended = log_prices
        .iter()
        .enumerate()
        .map(|(t, x)| x - rho * t as f64)
        .collect();
    Ok(DetrendedSeries {
        log_prices: detrended,
        rho,
    })
}

/// Detrend a price series (log-transform plus [`detrend_log_prices`]).
pub fn detrend(series: &PriceSeries) -> Result<DetrendedSeries> {
    let logs: Vec<f64> = series.closes.iter().map(|c| c.ln()).collect();
    detrend_log_prices(&logs)
}

/// All overlapping lag-T returns, one per start day.
pub fn sliding_returns(series: &DetrendedSeries, lag: usize) -> Result<ReturnSample> {
    let n = series.log_prices.len();
    if lag == 0 || lag >= n {
        return Err(Error::Domain(format!(
            "lag {lag} outside 1..{} for a series of {} points",
            n - 1,
            n
        )));
    }
    let returns = (0..n - lag)
        .map(|t| series.log_prices[t + lag] - series.log_prices[t])
        .collect();
    Ok(ReturnSample {
        lag,
        returns,
        rho: series.rho,
    })
}
