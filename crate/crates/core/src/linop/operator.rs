// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::scalar::Scalar;
use crate::{PrutfError, Result};

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as i64
}

/// Entry `(i, j)` of `DDᵀ` for the order-`r` operator: consecutive binomial
/// coefficients of order `2r + 2` with alternating signs, zero outside the band.
pub fn gram_entry(r: usize, i: usize, j: usize) -> i64 {
    let d = i.abs_diff(j);
    if d > r + 1 {
        return 0;
    }
    let magnitude = binomial(2 * r as u64 + 2, (r + 1 + d) as u64);
    if d % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// The `(r+1)`-th order difference operator `D^(r+1)` of shape `m × n`,
/// `m = n − r − 1`, held as its integer stencil.
///
/// Row `i` places the stencil at columns `i..=i+r+1`, so `(D v)_i` is the
/// `(r+1)`-th forward difference of `v` starting at `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceOperator {
    n: usize,
    r: usize,
    stencil: Vec<i64>,
}

impl DifferenceOperator {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < r + 2 {
            return Err(PrutfError::SignalTooShort { n, r });
        }
        // D^(1) has stencil (-1, 1); D^(k+1) = D^(1) D^(k) shifts and subtracts.
        let mut stencil = vec![-1i64, 1];
        for _ in 0..r {
            let mut next = vec![0i64; stencil.len() + 1];
            for (k, &c) in stencil.iter().enumerate() {
                next[k] -= c;
                next[k + 1] += c;
            }
            stencil = next;
        }
        Ok(Self { n, r, stencil })
    }

    /// Signal length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Polynomial order `r`; the operator differences `r + 1` times.
    pub fn order(&self) -> usize {
        self.r
    }

    /// Number of rows `m = n − r − 1`, i.e. the dual dimension.
    pub fn rows(&self) -> usize {
        self.n - self.r - 1
    }

    pub fn stencil(&self) -> &[i64] {
        &self.stencil
    }

    /// `⌊(r+1)/2⌋`: coordinates after a change that `D f` cannot see.
    pub fn r_a(&self) -> usize {
        (self.r + 1) / 2
    }

    /// `⌈(r+1)/2⌉ − 1`: coordinates before a change that are nonzero.
    pub fn r_b(&self) -> usize {
        self.r / 2
    }

    fn check_len(&self, expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(PrutfError::DimensionMismatch { expected, got })
        }
    }

    /// `D v` for a length-`n` vector.
    pub fn apply<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(self.n, v.len())?;
        Ok((0..self.rows()).map(|i| self.row_dot(i, v)).collect())
    }

    /// `Dᵀ u` for a length-`m` vector.
    pub fn apply_transpose<T: Scalar>(&self, u: &[T]) -> Result<Vec<T>> {
        self.check_len(self.rows(), u.len())?;
        let mut out = vec![T::zero(); self.n];
        for (i, &ui) in u.iter().enumerate() {
            if ui != T::zero() {
                self.add_row(i, ui, &mut out);
            }
        }
        Ok(out)
    }

    /// `(D v)_i`.
    #[inline]
    pub fn row_dot<T: Scalar>(&self, i: usize, v: &[T]) -> T {
        self.stencil
            .iter()
            .zip(&v[i..i + self.stencil.len()])
            .fold(T::zero(), |acc, (&c, &x)| acc + T::of(c as f64) * x)
    }

    /// `out += weight · D_iᵀ`.
    #[inline]
    pub(crate) fn add_row<T: Scalar>(&self, i: usize, weight: T, out: &mut [T]) {
        for (k, &c) in self.stencil.iter().enumerate() {
            out[i + k] += weight * T::of(c as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_for_low_orders() {
        let d = DifferenceOperator::new(6, 0).unwrap();
        assert_eq!(d.stencil(), &[-1, 1]);
        assert_eq!(d.rows(), 5);
        let d = DifferenceOperator::new(6, 1).unwrap();
        assert_eq!(d.stencil(), &[1, -2, 1]);
        assert_eq!(d.rows(), 4);
        assert_eq!(
            DifferenceOperator::new(3, 2),
            Err(PrutfError::SignalTooShort { n: 3, r: 2 })
        );
    }

    #[test]
    fn stencil_is_signed_binomial_row() {
        for r in 0..8usize {
            let d = DifferenceOperator::new(r + 2, r).unwrap();
            for (k, &c) in d.stencil().iter().enumerate() {
                let sign = if (r + 1 - k) % 2 == 0 { 1 } else { -1 };
                assert_eq!(c, sign * binomial(r as u64 + 1, k as u64));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let d0 = DifferenceOperator::new(4, 0).unwrap();
        assert_eq!(d0.apply(&[0.0, 0.0, 1.0, 1.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        let d1 = DifferenceOperator::new(4, 1).unwrap();
        assert_eq!(d1.apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
        let d2 = DifferenceOperator::new(6, 2).unwrap();
        let cubes: Vec<f64> = (1..=6).map(|i| f64::from(i * i * i)).collect();
        assert_eq!(d2.apply(&cubes).unwrap(), vec![6.0, 6.0, 6.0]);
        assert!(matches!(
            d2.apply(&[1.0f64; 5]),
            Err(PrutfError::DimensionMismatch { expected: 6, got: 5 })
        ));
    }

    #[test]
    fn transpose_is_adjoint() {
        let d = DifferenceOperator::new(9, 2).unwrap();
        let v: Vec<f64> = (0..9).map(|i| ((i * 7 % 5) as f64) - 1.5).collect();
        let u: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let dv = d.apply(&v).unwrap();
        let dtu = d.apply_transpose(&u).unwrap();
        let lhs: f64 = dv.iter().zip(&u).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(&dtu).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn gram_entries() {
        assert_eq!(
            (0..5).map(|j| gram_entry(1, 2, j)).collect::<Vec<_>>(),
            vec![1, -4, 6, -4, 1]
        );
        assert_eq!(gram_entry(0, 3, 3), 2);
        assert_eq!(gram_entry(0, 3, 4), -1);
        assert_eq!(gram_entry(2, 0, 4), 0);
        assert_eq!(gram_entry(1, 0, 3), 0);
    }

    #[test]
    fn split_sizes() {
        let sizes: Vec<(usize, usize)> = (0..5)
            .map(|r| {
                let d = DifferenceOperator::new(10, r).unwrap();
                (d.r_a(), d.r_b())
            })
            .collect();
        assert_eq!(sizes, vec![(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]);
    }
}
