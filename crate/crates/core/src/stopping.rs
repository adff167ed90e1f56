// SPDX-License-Identifier: MIT OR Apache-2.0

//! Termination of the path search and noise-scale estimation.
//!
//! Within one interior block the stochastic part of the dual behaves like a
//! scaled Gaussian bridge. The search stops once its supremum falls below
//! the level a bridge exceeds with probability `alpha`.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::linop::{binomial, DifferenceOperator};
use crate::path::PathState;
use crate::scalar::{ensure_finite, Scalar};
use crate::{PrutfError, Result};

/// Noise scale used by the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseScale {
    Known(f64),
    /// Median absolute deviation of the `(r+1)`-th differences.
    Mad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    pub alpha: f64,
    pub sigma: NoiseScale,
    pub series_tol: f64,
    pub max_terms: usize,
    /// Test every interior block against its own threshold instead of the
    /// single global one.
    pub per_block: bool,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            sigma: NoiseScale::Mad,
            series_tol: 1e-14,
            max_terms: 200,
            per_block: false,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PrutfError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if let NoiseScale::Known(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(PrutfError::InvalidConfig(format!("sigma must be positive, got {s}")));
            }
        }
        if self.max_terms == 0 {
            return Err(PrutfError::InvalidConfig("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

/// `k = m − |A|` and `S²`, the last diagonal entry of `(D₋ᴀD₋ᴀᵀ)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeScale {
    pub k: usize,
    pub s2: f64,
}

/// `P(sup |B| > x)` for a Brownian bridge with variance scale `s2`, i.e.
/// `2 Σ (−1)^{i+1} exp(−2 i² x² / s2)`, clamped to `[0, 1]`.
pub fn excursion_prob(x: f64, s2: f64) -> f64 {
    excursion_prob_with(x, s2, 1e-14, 200)
}

pub fn excursion_prob_with(x: f64, s2: f64, series_tol: f64, max_terms: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let z = x / s2.sqrt();
    // The alternating series converges slowly near 0; there the Jacobi
    // transform of the same function converges fast.
    let p = if z < 1.0 {
        let mut acc = 0.0;
        for k in 1..=max_terms {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * std::f64::consts::PI.powi(2) / (8.0 * z * z)).exp();
            acc += term;
            if term < series_tol {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / z * acc
    } else {
        let mut acc = 0.0;
        for i in 1..=max_terms {
            let i = i as f64;
            let term = (-2.0 * i * i * z * z).exp();
            acc += if i as usize % 2 == 1 { term } else { -term };
            if term < series_tol {
                break;
            }
        }
        2.0 * acc
    };
    p.clamp(0.0, 1.0)
}

/// Solves `excursion_prob(x, s2) = alpha` by bisection on `[0, 10 √s2]`.
pub fn threshold_x_alpha(alpha: f64, s2: f64) -> Result<f64> {
    threshold_x_alpha_with(alpha, s2, 1e-14, 200)
}

pub fn threshold_x_alpha_with(alpha: f64, s2: f64, series_tol: f64, max_terms: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PrutfError::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(s2 > 0.0 && s2.is_finite()) {
        return Err(PrutfError::InvalidConfig(format!("variance scale must be positive, got {s2}")));
    }
    let scale = s2.sqrt();
    let (mut lo, mut hi) = (0.0, 10.0 * scale);
    let f = |x: f64| excursion_prob_with(x, s2, series_tol, max_terms) - alpha;
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(PrutfError::BracketFailure { alpha });
    }
    while hi - lo > 1e-10 * scale {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scale of the current state, or `None` when no more than `r` interior
/// coordinates remain.
pub fn bridge_scale<T: Scalar>(state: &PathState<T>) -> Option<BridgeScale> {
    let r = state.boundary.order();
    let k = state.boundary.interior_len();
    if k <= r {
        return None;
    }
    let s2 = state.gram.last_inverse_diagonal()?.to_f64_lossy();
    Some(BridgeScale { k, s2 })
}

/// `σ x_α (k − r)^{(2r+1)/2}`.
pub fn threshold(sigma: f64, x_alpha: f64, k: usize, r: usize) -> f64 {
    sigma * x_alpha * ((k - r) as f64).powf((2 * r + 1) as f64 / 2.0)
}

/// Whether the search should stop at `state`, i.e. whether the interior
/// dual is consistent with pure noise.
pub fn should_stop<T: Scalar>(state: &PathState<T>, sigma: f64, cfg: &StoppingConfig) -> Result<bool> {
    let r = state.boundary.order();
    if cfg.per_block {
        for block in state.gram.blocks() {
            if block.len <= r {
                continue;
            }
            let s2 = state
                .gram
                .block_inverse_diagonal(block)
                .expect("nonempty block")
                .to_f64_lossy();
            let x = threshold_x_alpha_with(cfg.alpha, s2, cfg.series_tol, cfg.max_terms)?;
            let sup = state.a[block.start..block.start + block.len]
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.to_f64_lossy().abs()));
            if sup > threshold(sigma, x, block.len, r) {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let Some(scale) = bridge_scale(state) else {
        return Ok(true);
    };
    let x = threshold_x_alpha_with(cfg.alpha, scale.s2, cfg.series_tol, cfg.max_terms)?;
    Ok(state.interior_sup().to_f64_lossy() <= threshold(sigma, x, scale.k, r))
}

/// `median |D^{(r+1)} y| / (√C(2r+2, r+1) Φ⁻¹(3/4))`.
pub fn estimate_sigma_mad<T: Scalar>(y: &[T], r: usize) -> Result<f64> {
    ensure_finite(y)?;
    let op = DifferenceOperator::new(y.len(), r)?;
    let mut dev: Vec<f64> = op.apply(y)?.into_iter().map(|v| v.to_f64_lossy().abs()).collect();
    dev.sort_by(f64::total_cmp);
    let mid = dev.len() / 2;
    let median = if dev.len() % 2 == 1 {
        dev[mid]
    } else {
        0.5 * (dev[mid - 1] + dev[mid])
    };
    let quartile = Normal::standard().inverse_cdf(0.75);
    let norm = (binomial(2 * r as u64 + 2, r as u64 + 1) as f64).sqrt();
    let sigma = median / (norm * quartile);
    if sigma > 0.0 && sigma.is_finite() {
        Ok(sigma)
    } else {
        Err(PrutfError::DegenerateScale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_critical_value() {
        let x = threshold_x_alpha(0.05, 1.0).unwrap();
        assert!((x - 1.3581).abs() < 1e-3);
        assert!((excursion_prob(x, 1.0) - 0.05).abs() < 1e-8);
    }

    #[test]
    fn limits() {
        assert!((excursion_prob(1e-6, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(excursion_prob(50.0, 1.0), 0.0);
    }

    #[test]
    fn both_series_agree_at_the_switch() {
        let below = excursion_prob(1.0 - 1e-12, 1.0);
        let above = excursion_prob(1.0, 1.0);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn scaling_and_monotonicity() {
        let base = threshold_x_alpha(0.05, 1.0).unwrap();
        let scaled = threshold_x_alpha(0.05, 4.0).unwrap();
        assert!((scaled - 2.0 * base).abs() < 1e-9);
        assert!(threshold_x_alpha(0.01, 1.0).unwrap() > threshold_x_alpha(0.10, 1.0).unwrap());
        assert!(matches!(threshold_x_alpha(1e-300, 1.0), Err(PrutfError::BracketFailure { .. })));
    }

    #[test]
    fn mad_equivariance_and_degeneracy() {
        let y: Vec<f64> = (0..101).map(|i| ((i * 37) % 17) as f64 * 0.1).collect();
        let s = estimate_sigma_mad(&y, 0).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert!((estimate_sigma_mad(&y2, 0).unwrap() - 2.0 * s).abs() < 1e-12);
        assert_eq!(estimate_sigma_mad(&[3.0; 20], 1), Err(PrutfError::DegenerateScale));
    }

    #[test]
    fn quartile_constant() {
        assert!((Normal::standard().inverse_cdf(0.75) - 0.6744897501960817).abs() < 1e-8);
    }
}
