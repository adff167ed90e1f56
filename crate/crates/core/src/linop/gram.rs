// SPDX-License-Identifier: MIT OR Apache-2.0

use std::sync::Arc;

use super::{AugmentedBoundary, BandedCholesky, DifferenceOperator, InteriorBlock};
use crate::scalar::{ensure_finite, Scalar};
use crate::{PrutfError, Result};

/// `D₋ᴀD₋ᴀᵀ` as a block-diagonal matrix of leading `DDᵀ` blocks, one per
/// interior block, all solved through a shared prefix factor.
#[derive(Debug, Clone)]
pub struct BlockedGram<T> {
    factor: Arc<BandedCholesky<T>>,
    blocks: Vec<InteriorBlock>,
}

impl<T: Scalar> BlockedGram<T> {
    /// Factors what is needed for `boundary` from scratch.
    pub fn new(op: &DifferenceOperator, boundary: &AugmentedBoundary) -> Result<Self> {
        let factor = Arc::new(BandedCholesky::toeplitz_gram(op.order(), op.rows())?);
        Self::with_factor(factor, boundary)
    }

    /// Reuses an existing prefix factor; no refactorization happens.
    pub fn with_factor(factor: Arc<BandedCholesky<T>>, boundary: &AugmentedBoundary) -> Result<Self> {
        if factor.size() < boundary.dual_len() || factor.bandwidth() != boundary.order() + 1 {
            return Err(PrutfError::DimensionMismatch {
                expected: boundary.dual_len(),
                got: factor.size(),
            });
        }
        Ok(Self {
            factor,
            blocks: boundary.interior_blocks(),
        })
    }

    pub fn factor(&self) -> &Arc<BandedCholesky<T>> {
        &self.factor
    }

    /// All `J + 1` blocks in dual coordinates, including empty ones.
    pub fn blocks(&self) -> &[InteriorBlock] {
        &self.blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len).collect()
    }

    pub fn interior_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    /// Solves `(D₋ᴀD₋ᴀᵀ) x = v` where `v` lists the interior coordinates in order.
    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        let total = self.interior_len();
        if v.len() != total {
            return Err(PrutfError::DimensionMismatch {
                expected: total,
                got: v.len(),
            });
        }
        ensure_finite(v)?;
        let mut x = v.to_vec();
        let mut offset = 0;
        for block in &self.blocks {
            self.factor.solve_prefix_in_place(&mut x[offset..offset + block.len]);
            offset += block.len;
        }
        Ok(x)
    }

    /// Same solve on a full length-`m` vector indexed by dual coordinate.
    /// Augmented coordinates are ignored on input and zeroed on output.
    pub fn solve_dual_in_place(&self, v: &mut [T]) {
        let mut cursor = 0;
        for block in &self.blocks {
            v[cursor..block.start].iter_mut().for_each(|x| *x = T::zero());
            self.factor.solve_prefix_in_place(&mut v[block.start..block.start + block.len]);
            cursor = block.start + block.len;
        }
        v[cursor..].iter_mut().for_each(|x| *x = T::zero());
    }

    /// `M y` with `M = (D₋ᴀD₋ᴀᵀ)⁻¹D₋ᴀ`, returned as a length-`m` vector that is
    /// zero on augmented coordinates. Every row of `M` is a contrast.
    pub fn contrast_apply(&self, op: &DifferenceOperator, y: &[T]) -> Result<Vec<T>> {
        let mut dy = op.apply(y)?;
        self.solve_dual_in_place(&mut dy);
        Ok(dy)
    }

    /// `S²`: the last diagonal entry of `(D₋ᴀD₋ᴀᵀ)⁻¹`, i.e. of the last
    /// nonempty block.
    pub fn last_inverse_diagonal(&self) -> Option<T> {
        let last = self.blocks.iter().rev().find(|b| b.len > 0)?;
        self.factor.last_inverse_diagonal(last.len)
    }

    /// Last diagonal entry of the inverse of one block.
    pub fn block_inverse_diagonal(&self, block: &InteriorBlock) -> Option<T> {
        self.factor.last_inverse_diagonal(block.len)
    }
}

/// `D_Aᵀ s_A`, a length-`n` vector: each run contributes `sign · Σ D_iᵀ`
/// over its augmented coordinates.
pub fn boundary_load<T: Scalar>(op: &DifferenceOperator, boundary: &AugmentedBoundary) -> Vec<T> {
    let mut out = vec![T::zero(); op.n()];
    for run in boundary.runs() {
        if run.sign == 0 {
            continue;
        }
        let weight = T::of(f64::from(run.sign));
        let (first, last) = boundary.span(run.tau).expect("stored runs fit");
        for i in first..=last {
            op.add_row(i, weight, &mut out);
        }
    }
    out
}

/// Contribution of a single run to [`boundary_load`].
pub fn run_load<T: Scalar>(op: &DifferenceOperator, boundary: &AugmentedBoundary, tau: usize, sign: i8) -> Vec<T> {
    let mut out = vec![T::zero(); op.n()];
    if let Some((first, last)) = boundary.span(tau) {
        for i in first..=last {
            op.add_row(i, T::of(f64::from(sign)), &mut out);
        }
    }
    out
}
