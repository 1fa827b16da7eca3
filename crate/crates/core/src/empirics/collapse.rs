//! Scaling collapse of return histograms across lags.
//!
//! Rescaling a lag-T histogram by `T^D` in both axes maps it onto the
//! common scaling function when `D` is the true exponent. The misfit is the
//! mean squared log-density difference over the overlapping support of each
//! histogram pair; minimizing it over `D` yields the empirical exponent.

use crate::empirics::histogram::HistogramPdf;
use crate::error::{Error, Result};

/// Rescaled step-function view of a histogram: `phi(u) = T^D p(u T^D)`.
struct Rescaled<'a> {
    hist: &'a HistogramPdf,
    factor: f64, // T^D
}

impl<'a> Rescaled<'a> {
    fn new(hist: &'a HistogramPdf, d: f64) -> Self {
        Self {
            hist,
            factor: (hist.lag as f64).powf(d),
        }
    }

    /// Rescaled support endpoints.
    fn support(&self) -> (f64, f64) {
        let lo = self.hist.edges[0] / self.factor;
        let hi = self.hist.edges[self.hist.edges.len() - 1] / self.factor;
        (lo, hi)
    }

    /// Rescaled density at `u`, or `None` outside the support or where the
    /// underlying bin is empty.
    fn at(&self, u: f64) -> Option<f64> {
        let x = u * self.factor;
        let (e0, w) = (self.hist.edges[0], self.hist.bin_width());
        if x < e0 || x > *self.hist.edges.last().unwrap() {
            return None;
        }
        let idx = (((x - e0) / w) as usize).min(self.hist.densities.len() - 1);
        let d = self.hist.densities[idx];
        (d > 0.0).then_some(d * self.factor)
    }
}

/// Misfit of the collapse at exponent `d`.
///
/// Mean over histogram pairs of the mean squared log-density difference on
/// an even grid across the pair's overlapping support. A single histogram
/// has misfit zero by convention.
pub fn collapse_metric(histograms: &[HistogramPdf], d: f64) -> Result<f64> {
    if histograms.is_empty() {
        return Err(Error::Metric("no histograms supplied".into()));
    }
    if histograms.len() == 1 {
        return Ok(0.0);
    }
    const PROBE_POINTS: usize = 201;
    let rescaled: Vec<Rescaled> = histograms.iter().map(|h| Rescaled::new(h, d)).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..rescaled.len() {
        for j in i + 1..rescaled.len() {
            let (lo_i, hi_i) = rescaled[i].support();
            let (lo_j, hi_j) = rescaled[j].support();
            let lo = lo_i.max(lo_j);
            let hi = hi_i.min(hi_j);
            if hi <= lo {
                return Err(Error::Metric(format!(
                    "rescaled supports of lags {} and {} do not overlap at D = {d}",
                    histograms[i].lag, histograms[j].lag
                )));
            }
            let step = (hi - lo) / (PROBE_POINTS - 1) as f64;
            let mut acc = 0.0;
            let mut used = 0usize;
            for m in 0..PROBE_POINTS {
                let u = lo + m as f64 * step;
                if let (Some(a), Some(b)) = (rescaled[i].at(u), rescaled[j].at(u)) {
                    let diff = a.ln() - b.ln();
                    acc += diff * diff;
                    used += 1;
                }
            }
            if used == 0 {
                return Err(Error::Metric(format!(
                    "no jointly occupied bins between lags {} and {} at D = {d}",
                    histograms[i].lag, histograms[j].lag
                )));
            }
            total += acc / used as f64;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Minimize the collapse misfit over the exponent.
///
/// Coarse grid over `[0.05, 1.0]` followed by a golden-section refinement;
/// deterministic. Returns `(d_hat, misfit)`.
pub fn fit_collapse_exponent(histograms: &[HistogramPdf]) -> Result<(f64, f64)> {
    if histograms.len() < 2 {
        return Err(Error::Metric(
            "collapse fit needs at least two lags".into(),
        ));
    }
    let mut best = (f64::NAN, f64::INFINITY);
    let mut d = 0.05;
    while d <= 1.0 + 1e-9 {
        if let Ok(m) = collapse_metric(histograms, d) {
            if m < best.1 {
                best = (d, m);
            }
        }
        d += 0.01;
    }
    if !best.0.is_finite() {
        return Err(Error::Metric(
            "collapse misfit undefined on the whole exponent grid".into(),
        ));
    }
    // Golden-section refinement around the grid minimum.
    let (mut lo, mut hi) = ((best.0 - 0.02).max(0.01), (best.0 + 0.02).min(1.2));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        let fa = collapse_metric(histograms, a)?;
        let fb = collapse_metric(histograms, b)?;
        if fa < fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    let d_hat = 0.5 * (lo + hi);
    Ok((d_hat, collapse_metric(histograms, d_hat)?))
}
