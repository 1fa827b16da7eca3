//! Normalized return histograms with symmetric binning about zero.

use serde::{Deserialize, Serialize};

use crate::empirics::series::ReturnSample;
use crate::error::{Error, Result};

/// Binning parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HistogramConfig {
    /// Number of bins (odd counts center a bin on zero).
    pub bins: usize,
    /// Half-range in units of the sample standard deviation.
    pub span_sigmas: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: 61,
            span_sigmas: 6.0,
        }
    }
}

/// Normalized histogram of a return sample at one lag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramPdf {
    pub lag: usize,
    /// `bins + 1` edges, symmetric about zero.
    pub edges: Vec<f64>,
    /// Per-bin densities (counts / (total * width)).
    pub densities: Vec<f64>,
    pub count: usize,
}

impl HistogramPdf {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Total mass `sum density * width`; one for any non-degenerate input.
    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }
}

/// Estimate the return PDF at the sample's lag.
///
/// Bins are symmetric about zero and span at least the full sample, so the
/// histogram always integrates to one. Needs at least 100 samples.
pub fn empirical_pdf(sample: &ReturnSample, cfg: &HistogramConfig) -> Result<HistogramPdf> {
    if sample.len() < 100 {
        return Err(Error::Estimation(format!(
            "histogram needs at least 100 samples, got {}",
            sample.len()
        )));
    }
    if cfg.bins < 1 {
        return Err(Error::Estimation("histogram needs at least one bin".into()));
    }
    let n = sample.len() as f64;
    let mean_sq: f64 = sample.returns.iter().map(|r| r * r).sum::<f64>() / n;
    let std = mean_sq.sqrt();
    let max_abs = sample
        .returns
        .iter()
        .fold(0.0f64, |acc, r| acc.max(r.abs()));
    // Nudge the span so the extreme sample falls inside the last bin.
    let mut span = (cfg.span_sigmas * std).max(max_abs * (1.0 + 1e-12));
    if span == 0.0 {
        span = 1.0;
    }

    let width = 2.0 * span / cfg.bins as f64;
    let mut counts = vec![0usize; cfg.bins];
    for &r in &sample.returns {
        let idx = (((r + span) / width) as usize).min(cfg.bins - 1);
        counts[idx] += 1;
    }
    let edges = (0..=cfg.bins)
        .map(|i| -span + i as f64 * width)
        .collect();
    let densities = counts
        .iter()
        .map(|&c| c as f64 / (n * width))
        .collect();
    Ok(HistogramPdf {
        lag: sample.lag,
        edges,
        densities,
        count: sample.len(),
    })
}
