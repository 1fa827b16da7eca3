//! Spherical product of characteristic functions.
//!
//! The joint characteristic function of `n` successive returns replaces the
//! single argument of `g~` by the Euclidean norm of the per-variable
//! arguments: `g~(k_1) (x) ... (x) g~(k_n) = g~(sqrt(k_1^2 + ... + k_n^2))`.
//! The product is commutative and associative with neutral element
//! `g~(0) = 1`, and for a single-component (Gaussian) mixture it reduces to
//! the ordinary product of one-dimensional characteristic functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::VolatilityMixture;

/// Per-variable standard-deviation multipliers entering the joint law.
///
/// Entry `i` multiplies the wavenumber `k_i`, so a stationary block of `n`
/// daily returns at duration `T` uses `sqrt(T)` in every slot while the
/// inhomogeneous process uses `a_i^(D_e)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleVector(Vec<f64>);

impl ScaleVector {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::Domain("scale vector must be non-empty".into()));
        }
        for (i, &s) in scales.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain(format!(
                    "scale {i} is {s}, expected strictly positive and finite"
                )));
            }
        }
        Ok(Self(scales))
    }

    /// Stationary scales: `sqrt(duration)` in each of `n` slots.
    pub fn stationary(n: usize, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Domain(format!(
                "duration {duration} must be strictly positive"
            )));
        }
        Self::new(vec![duration.sqrt(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for ScaleVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Joint characteristic function `g~(sqrt(sum_i s_i^2 k_i^2))`.
///
/// Zeroing any subset of the `k_i` marginalizes those variables exactly;
/// the aggregate return over the block corresponds to equal `k_i`.
pub fn otimes_joint_cf(mix: &VolatilityMixture, scales: &ScaleVector, k: &[f64]) -> Result<f64> {
    if scales.len() != k.len() {
        return Err(Error::Contract(format!(
            "scale vector has {} entries but wavenumber vector has {}",
            scales.len(),
            k.len()
        )));
    }
    let radius2: f64 = scales
        .iter()
        .zip(k)
        .map(|(s, ki)| s * s * ki * ki)
        .sum();
    Ok(mix.cf(radius2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_component() -> VolatilityMixture {
        VolatilityMixture::new(vec![(0.5, 1.0), (0.5, 2.0)]).unwrap()
    }

    #[test]
    fn neutral_element_at_zero() {
        let mix = two_component();
        let scales = ScaleVector::stationary(3, 2.0).unwrap();
        assert_eq!(
            otimes_joint_cf(&mix, &scales, &[0.0, 0.0, 0.0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn marginal_reduces_to_single_argument() {
        // (k, 0) leaves the one-variable characteristic function at scale s_1.
        let mix = two_component();
        let t = 3.0;
        let scales = ScaleVector::stationary(2, t).unwrap();
        for &k in &[0.1, 0.9, 2.4] {
            let joint = otimes_joint_cf(&mix, &scales, &[k, 0.0]).unwrap();
            assert_relative_eq!(joint, mix.cf(t.sqrt() * k), max_relative = 1e-15);
            let joint = otimes_joint_cf(&mix, &scales, &[0.0, k]).unwrap();
            assert_relative_eq!(joint, mix.cf(t.sqrt() * k), max_relative = 1e-15);
        }
    }

    #[test]
    fn aggregate_argument_doubles_duration() {
        // (k, k) at scales (sqrt(T), sqrt(T)) equals g~(sqrt(2T) k).
        let mix = two_component();
        let t = 1.7;
        let scales = ScaleVector::stationary(2, t).unwrap();
        for &k in &[0.2, 1.0, 3.3] {
            let joint = otimes_joint_cf(&mix, &scales, &[k, k]).unwrap();
            assert_relative_eq!(joint, mix.cf((2.0 * t).sqrt() * k), max_relative = 1e-15);
        }
    }

    #[test]
    fn gaussian_case_factorizes() {
        let mix = VolatilityMixture::single(1.0).unwrap();
        let scales = ScaleVector::new(vec![1.0, 1.0]).unwrap();
        let joint = otimes_joint_cf(&mix, &scales, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(joint, (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(
            joint,
            mix.cf(1.0) * mix.cf(1.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn dimension_mismatch_is_contract_violation() {
        let mix = two_component();
        let scales = ScaleVector::stationary(2, 1.0).unwrap();
        assert!(matches!(
            otimes_joint_cf(&mix, &scales, &[0.1]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn scale_vector_validation() {
        assert!(ScaleVector::new(vec![]).is_err());
        assert!(ScaleVector::new(vec![1.0, 0.0]).is_err());
        assert!(ScaleVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(ScaleVector::stationary(2, -1.0).is_err());
    }

    proptest! {
        /// Zeroing a subset of wavenumbers equals the joint CF of the rest.
        #[test]
        fn marginalization_is_exact(
            k in proptest::collection::vec(-3.0f64..3.0, 2..6),
            mask in proptest::collection::vec(proptest::bool::ANY, 2..6),
            dur in 0.5f64..4.0,
        ) {
            let n = k.len().min(mask.len());
            let k = &k[..n];
            let mask = &mask[..n];
            let mix = two_component();
            let scales = ScaleVector::stationary(n, dur).unwrap();
            let zeroed: Vec<f64> = k.iter().zip(mask).map(|(ki, m)| if *m { *ki } else { 0.0 }).collect();
            let full = otimes_joint_cf(&mix, &scales, &zeroed).unwrap();
            let kept: Vec<f64> = zeroed.iter().copied().filter(|v| *v != 0.0).collect();
            if kept.is_empty() {
                prop_assert_eq!(full, 1.0);
            } else {
                let sub = ScaleVector::stationary(kept.len(), dur).unwrap();
                let reduced = otimes_joint_cf(&mix, &sub, &kept).unwrap();
                prop_assert!((full - reduced).abs() <= 1e-14);
            }
        }

        /// Single-component mixtures factorize into ordinary products.
        #[test]
        fn gaussian_reduction(
            k in proptest::collection::vec(-3.0f64..3.0, 1..6),
            sigma in 0.3f64..2.5,
            dur in 0.5f64..4.0,
        ) {
            let mix = VolatilityMixture::single(sigma).unwrap();
            let scales = ScaleVector::stationary(k.len(), dur).unwrap();
            let joint = otimes_joint_cf(&mix, &scales, &k).unwrap();
            let product: f64 = k.iter().map(|ki| mix.cf(dur.sqrt() * ki)).product();
            prop_assert!((joint - product).abs() <= 1e-14);
        }
    }
}
