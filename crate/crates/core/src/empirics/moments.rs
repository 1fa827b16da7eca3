//! Moment-scaling exponents and effective-dimension curves.

use serde::{Deserialize, Serialize};

use crate::empirics::autocorr::slope;
use crate::empirics::series::ReturnSample;
use crate::error::{Error, Result};
use crate::schedule::interval_width;

/// Absolute moments `<|r|^q>` per lag and their scaling exponents `D(q)`,
/// the least-squares slopes of `log <|r|^q>` versus `log T`.
///
/// Simple scaling with exponent `D` gives `D(q) = q D`; multiscaling shows
/// up as `D(q) < q/2` at higher orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub orders: Vec<f64>,
    pub lags: Vec<usize>,
    /// `moments[qi][ti]` is `<|r|^q>` at order `orders[qi]` and lag `lags[ti]`.
    pub moments: Vec<Vec<f64>>,
    /// `exponents[qi]` is `D(q)` for `orders[qi]`.
    pub exponents: Vec<f64>,
}

impl MomentTable {
    pub fn exponent_for(&self, q: f64) -> Option<f64> {
        self.orders
            .iter()
            .position(|&o| (o - q).abs() < 1e-12)
            .map(|i| self.exponents[i])
    }
}

/// Estimate `D(q)` from return samples at several lags.
pub fn moment_scaling(samples: &[ReturnSample], orders: &[f64]) -> Result<MomentTable> {
    if samples.len() < 2 {
        return Err(Error::Estimation(
            "moment scaling needs at least two lags".into(),
        ));
    }
    if orders.is_empty() {
        return Err(Error::Estimation("no moment orders requested".into()));
    }
    for s in samples {
        if s.is_empty() {
            return Err(Error::Estimation(format!("empty sample at lag {}", s.lag)));
        }
    }
    let lags: Vec<usize> = samples.iter().map(|s| s.lag).collect();
    let mut moments = Vec::with_capacity(orders.len());
    let mut exponents = Vec::with_capacity(orders.len());
    for &q in orders {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Estimation(format!("moment order {q} must be positive")));
        }
        let row: Vec<f64> = samples
            .iter()
            .map(|s| {
                s.returns.iter().map(|r| r.abs().powf(q)).sum::<f64>() / s.len() as f64
            })
            .collect();
        if row.iter().any(|&m| m <= 0.0 || !m.is_finite()) {
            return Err(Error::Estimation(format!(
                "degenerate moment of order {q}: {row:?}"
            )));
        }
        let pts: Vec<(f64, f64)> = lags
            .iter()
            .zip(&row)
            .map(|(&t, &m)| ((t as f64).ln(), m.ln()))
            .collect();
        exponents.push(slope(&pts));
        moments.push(row);
    }
    Ok(MomentTable {
        orders: orders.to_vec(),
        lags,
        moments,
        exponents,
    })
}

/// Effective local scaling exponent of the interval width at epoch age `t`:
/// the least-squares slope of `log width(t, T)` versus `log T` over the
/// integer durations `t_range`.
///
/// Moment-order independent because every moment of the interval density
/// scales with the width. Equal to `d_e` exactly at `t = 0` and increasing
/// towards `1/2` with `t` when `d_e < 1/2`.
pub fn effective_dimension_curve(
    d_e: f64,
    ages: &[f64],
    t_range: (usize, usize),
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = t_range;
    if lo < 1 || hi <= lo {
        return Err(Error::Domain(format!("bad duration range [{lo}, {hi}]")));
    }
    let mut out = Vec::with_capacity(ages.len());
    for &t in ages {
        let pts: Vec<(f64, f64)> = (lo..=hi)
            .map(|dur| {
                let w = interval_width(d_e, t, dur as f64)?;
                Ok(((dur as f64).ln(), w.ln()))
            })
            .collect::<Result<_>>()?;
        out.push((t, slope(&pts)));
    }
    Ok(out)
}
