//! Inhomogeneity coefficients and the time-inhomogeneous scaling law.
//!
//! Inside an epoch the standard deviation of the return on day `i` carries a
//! factor `a_i = [i^(2 D_e) - (i-1)^(2 D_e)]^(1/(2 D_e))`. The powers
//! `a_i^(2 D_e)` telescope, so any contiguous block of days aggregates to the
//! interval width `sqrt((t+T)^(2 D_e) - t^(2 D_e))`. At `D_e = 1/2` every
//! coefficient is one and the process is stationary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::VolatilityMixture;

/// Ensemble exponent plus the first `n` inhomogeneity coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneitySchedule {
    d_e: f64,
    coefficients: Vec<f64>,
}

impl InhomogeneitySchedule {
    pub fn d_e(&self) -> f64 {
        self.d_e
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Coefficient `a_i` for `i` in `1..=len`.
    pub fn coefficient(&self, i: usize) -> f64 {
        self.coefficients[i - 1]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

fn check_exponent(d_e: f64) -> Result<()> {
    if !(d_e > 0.0 && d_e <= 1.0 && d_e.is_finite()) {
        return Err(Error::Domain(format!(
            "ensemble exponent {d_e} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Variance factor `a_i^(2 D_e) = i^(2 D_e) - (i-1)^(2 D_e)` of stage `i`.
///
/// This is the quantity that actually enters densities and the sampler; it
/// avoids the lossy round trip through the `1/(2 D_e)` root.
pub fn stage_variance_factor(d_e: f64, stage: usize) -> f64 {
    debug_assert!(stage >= 1);
    let p = 2.0 * d_e;
    let i = stage as f64;
    if stage == 1 {
        1.0
    } else {
        i.powf(p) - (i - 1.0).powf(p)
    }
}

/// Coefficient `a_i` itself.
pub fn stage_coefficient(d_e: f64, stage: usize) -> f64 {
    if stage == 1 {
        1.0
    } else {
        stage_variance_factor(d_e, stage).powf(1.0 / (2.0 * d_e))
    }
}

/// Build the schedule `a_1..a_n` for ensemble exponent `d_e`.
pub fn inhom_coefficients(d_e: f64, n: usize) -> Result<InhomogeneitySchedule> {
    check_exponent(d_e)?;
    if n == 0 {
        return Err(Error::Domain("schedule length must be at least 1".into()));
    }
    let coefficients = (1..=n).map(|i| stage_coefficient(d_e, i)).collect();
    Ok(InhomogeneitySchedule { d_e, coefficients })
}

/// Width `sqrt((t+T)^(2 D_e) - t^(2 D_e))` of the return distribution over
/// the interval `[t, t+T]` measured from the start of an epoch.
pub fn interval_width(d_e: f64, t: f64, duration: f64) -> Result<f64> {
    check_exponent(d_e)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("start day {t} must be nonnegative")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "duration {duration} must be strictly positive"
        )));
    }
    let p = 2.0 * d_e;
    Ok(((t + duration).powf(p) - t.powf(p)).sqrt())
}

/// Density of the return over `[t, t+T]`: the mixture rescaled by the
/// interval width.
pub fn inhom_pdf(
    mix: &VolatilityMixture,
    d_e: f64,
    t: f64,
    duration: f64,
    r: f64,
) -> Result<f64> {
    let width = interval_width(d_e, t, duration)?;
    mix.scaled_pdf(width, r)
}
