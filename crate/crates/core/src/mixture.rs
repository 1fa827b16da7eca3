//! The scaling function as a finite Gaussian scale mixture.
//!
//! A mixture `g(x) = sum_j w_j Normal(x; 0, sigma_j^2)` is symmetric and
//! unit-normalized by construction, its characteristic function
//! `g~(k) = sum_j w_j exp(-sigma_j^2 k^2 / 2)` is real, even and bounded by
//! one, and the spherical multi-argument extension of `g~` is guaranteed to
//! be a valid joint characteristic function. Conditional laws stay inside
//! the family, which is what makes the autoregressive sampler exact.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.5066282746310002;

/// Tolerance on the weight normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One mixture component: a zero-mean normal with weight `weight` and
/// standard deviation `sigma` (per square-root day).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub sigma: f64,
}

/// Discrete Gaussian scale mixture representing the scaling function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityMixture {
    components: Vec<MixtureComponent>,
}

impl VolatilityMixture {
    /// Build a mixture from `(weight, sigma)` pairs.
    ///
    /// Weights must be in `(0, 1]` and sum to one within `1e-12`; sigmas must
    /// be strictly positive and finite.
    pub fn new(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("mixture needs at least one component".into()));
        }
        let mut sum = 0.0;
        for (i, &(w, s)) in components.iter().enumerate() {
            if !(w > 0.0 && w <= 1.0 && w.is_finite()) {
                return Err(Error::Domain(format!(
                    "component {i}: weight {w} not in (0, 1]"
                )));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain(format!(
                    "component {i}: sigma {s} not strictly positive and finite"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Domain(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        Ok(Self {
            components: components
                .into_iter()
                .map(|(weight, sigma)| MixtureComponent { weight, sigma })
                .collect(),
        })
    }

    /// Single-component (Gaussian) mixture.
    pub fn single(sigma: f64) -> Result<Self> {
        Self::new(vec![(1.0, sigma)])
    }

    /// Fat-tailed preset: a Student-t law with `nu` degrees of freedom and
    /// scale `scale`, discretized as an equal-weight mixture.
    ///
    /// A Student-t variable is a normal with an inverse-gamma distributed
    /// variance `V ~ InvGamma(nu/2, nu scale^2 / 2)`. The preset takes the
    /// variance quantiles at the `k` midpoints `(j + 1/2)/k` and uses their
    /// square roots as component sigmas. Tail moments of the continuous law
    /// are therefore only approximated, which is the point: the mixture has
    /// finite moments of every order while looking Student-t over the
    /// sampled range.
    pub fn student_t(nu: f64, scale: f64, k: usize) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("degrees of freedom {nu} must be positive")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale {scale} must be positive")));
        }
        if k == 0 {
            return Err(Error::Domain("component count must be at least 1".into()));
        }
        // V = 1/W with W ~ Gamma(shape nu/2, rate nu scale^2 / 2), so the p-th
        // variance quantile is 1 / W-quantile(1 - p).
        let gamma = Gamma::new(nu / 2.0, nu * scale * scale / 2.0)
            .map_err(|e| Error::Domain(format!("invalid gamma parameters: {e}")))?;
        let w = 1.0 / k as f64;
        let mut components = Vec::with_capacity(k);
        for j in 0..k {
            let p = (j as f64 + 0.5) / k as f64;
            let variance = 1.0 / gamma.inverse_cdf(1.0 - p);
            components.push((w, variance.sqrt()));
        }
        Self::new(components)
    }

    /// Default fat-tailed mixture used throughout: Student-t preset with
    /// four degrees of freedom, sixteen components and a daily return scale
    /// typical of a large equity index.
    pub fn default_fat_tailed() -> Self {
        Self::student_t(4.0, 0.0077, 16).expect("preset parameters are valid")
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.components[j].weight
    }

    pub fn sigma(&self, j: usize) -> f64 {
        self.components[j].sigma
    }

    /// Mixture second moment `sum_j w_j sigma_j^2` (the variance of `g`).
    pub fn variance(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.sigma * c.sigma)
            .sum()
    }

    /// Mixture fourth sigma-moment `sum_j w_j sigma_j^4`. The kurtosis of
    /// `g` is `3 * fourth_sigma_moment / variance^2`.
    pub fn fourth_sigma_moment(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.sigma.powi(4))
            .sum()
    }

    /// Copy with every sigma multiplied by `factor`.
    pub fn scaled_by(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("scale factor {factor} must be positive")));
        }
        Self::new(
            self.components
                .iter()
                .map(|c| (c.weight, c.sigma * factor))
                .collect(),
        )
    }

    /// Density `g(x)`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal_pdf(x, c.sigma))
            .sum()
    }

    /// Rescaled density `(1/scale) g(x/scale)`.
    ///
    /// Fails for non-positive `scale`.
    pub fn scaled_pdf(&self, scale: f64, x: f64) -> Result<f64> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale {scale} must be strictly positive")));
        }
        Ok(self.pdf(x / scale) / scale)
    }

    /// Characteristic function `g~(k) = sum_j w_j exp(-sigma_j^2 k^2 / 2)`.
    ///
    /// Real and even in `k`, with `g~(0) = 1` and `|g~(k)| <= 1`.
    pub fn cf(&self, k: f64) -> f64 {
        let k2 = k * k;
        self.components
            .iter()
            .map(|c| c.weight * (-0.5 * c.sigma * c.sigma * k2).exp())
            .sum()
    }
}

/// Zero-mean normal density.
pub fn normal_pdf(x: f64, sigma: f64) -> f64 {
    let z = x / sigma;
    (-0.5 * z * z).exp() / (sigma * SQRT_2PI)
}

/// Zero-mean normal log-density.
pub(crate) fn normal_log_pdf(x: f64, sigma: f64) -> f64 {
    let z = x / sigma;
    -0.5 * z * z - sigma.ln() - SQRT_2PI.ln()
}
