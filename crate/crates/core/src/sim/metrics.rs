// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::{PrutfError, Result};

/// Mean squared difference between an estimate and the truth.
pub fn metric_mse(f_hat: &[f64], f_true: &[f64]) -> Result<f64> {
    if f_hat.len() != f_true.len() {
        return Err(PrutfError::DimensionMismatch {
            expected: f_true.len(),
            got: f_hat.len(),
        });
    }
    if f_true.is_empty() {
        return Ok(0.0);
    }
    let sq: Vec<f64> = f_hat.iter().zip(f_true).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(crate::pairwise_sum(&sq) / sq.len() as f64)
}

/// Larger of the two directed max-min distances between change point
/// sets. Two empty sets are at distance 0; an empty set and a nonempty one
/// are at distance `n`.
pub fn metric_hausdorff(tau_hat: &[usize], tau_true: &[usize], n: usize) -> f64 {
    match (tau_hat.is_empty(), tau_true.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return n as f64,
        _ => {}
    }
    let directed = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&a| to.iter().map(|&b| a.abs_diff(b)).min().expect("nonempty"))
            .max()
            .expect("nonempty")
    };
    directed(tau_hat, tau_true).max(directed(tau_true, tau_hat)) as f64
}
