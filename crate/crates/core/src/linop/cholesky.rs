// SPDX-License-Identifier: MIT OR Apache-2.0

use super::operator::gram_entry;
use crate::scalar::Scalar;
use crate::{PrutfError, Result};

/// Banded Cholesky factor `L` of the `size × size` leading block of `DDᵀ`.
///
/// `DDᵀ` is Toeplitz, so every contiguous principal block of it equals a
/// leading block, and the Cholesky factor of a leading block is the leading
/// block of the larger factor. One factor therefore serves every interior
/// block of every boundary set: a block of length `len` solves against the
/// first `len` rows.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    bandwidth: usize,
    size: usize,
    // Row i holds L[i, i - bandwidth ..= i]; slot `bandwidth` is the diagonal.
    rows: Vec<T>,
}

impl<T: Scalar> BandedCholesky<T> {
    /// Factors the leading `size × size` block of `DDᵀ` for order `r`.
    pub fn toeplitz_gram(r: usize, size: usize) -> Result<Self> {
        let p = r + 1;
        let band: Vec<T> = (0..=p).map(|d| T::of(gram_entry(r, d, 0) as f64)).collect();
        let width = p + 1;
        let mut rows = vec![T::zero(); size * width];
        for i in 0..size {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = band[i - j];
                let t_lo = lo.max(j.saturating_sub(p));
                for t in t_lo..j {
                    s -= rows[i * width + p + t - i] * rows[j * width + p + t - j];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(PrutfError::NotPositiveDefinite { pivot: i });
                    }
                    rows[i * width + p] = s.sqrt();
                } else {
                    rows[i * width + p + j - i] = s / rows[j * width + p];
                }
            }
        }
        Ok(Self {
            bandwidth: p,
            size,
            rows,
        })
    }

    /// Largest block length this factor can solve.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.rows[i * (self.bandwidth + 1) + self.bandwidth + j - i]
    }

    /// Solves `G x = v` in place, `G` the leading `v.len()` block of `DDᵀ`.
    pub fn solve_prefix_in_place(&self, v: &mut [T]) {
        let len = v.len();
        assert!(len <= self.size, "block of length {len} exceeds factor size {}", self.size);
        let p = self.bandwidth;
        for i in 0..len {
            let mut s = v[i];
            for t in i.saturating_sub(p)..i {
                s -= self.at(i, t) * v[t];
            }
            v[i] = s / self.at(i, i);
        }
        for i in (0..len).rev() {
            let mut s = v[i];
            for t in i + 1..len.min(i + p + 1) {
                s -= self.at(t, i) * v[t];
            }
            v[i] = s / self.at(i, i);
        }
    }

    /// Last diagonal entry of the inverse of the leading `len` block,
    /// `1 / L[len-1, len-1]²`.
    pub fn last_inverse_diagonal(&self, len: usize) -> Option<T> {
        if len == 0 || len > self.size {
            return None;
        }
        let l = self.at(len - 1, len - 1);
        Some(T::one() / (l * l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_closed_form() {
        // inverse of tridiag(-1, 2, -1) of order m: min(i,j)(m+1-max(i,j))/(m+1), 1-based.
        let chol = BandedCholesky::<f64>::toeplitz_gram(0, 5).unwrap();
        let mut v = vec![0.0, 0.0, 1.0, 0.0, 0.0];
        chol.solve_prefix_in_place(&mut v);
        let expected = [0.5, 1.0, 1.5, 1.0, 0.5];
        for (x, e) in v.iter().zip(expected) {
            assert!((x - e).abs() < 1e-14, "{v:?}");
        }
        assert!((chol.last_inverse_diagonal(5).unwrap() - 5.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn prefix_solves_agree_with_smaller_factor() {
        let big = BandedCholesky::<f64>::toeplitz_gram(2, 40).unwrap();
        let small = BandedCholesky::<f64>::toeplitz_gram(2, 11).unwrap();
        let mut a: Vec<f64> = (0..11).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut b = a.clone();
        big.solve_prefix_in_place(&mut a);
        small.solve_prefix_in_place(&mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let chol = BandedCholesky::<f32>::toeplitz_gram(1, 8).unwrap();
        let mut v = vec![0.0f32; 8];
        chol.solve_prefix_in_place(&mut v);
        assert!(v.iter().all(|&x| x == 0.0));
    }
}
