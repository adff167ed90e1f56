// SPDX-License-Identifier: MIT OR Apache-2.0

//! Difference operators and the structured linear algebra around them.
//!
//! `D` is never stored densely. Everything the path algorithm needs is
//! expressed through the integer stencil of `D`, the banded Toeplitz Gram
//! matrix `DDᵀ`, and the block structure that removing augmented boundary
//! rows induces on `D₋ᴀD₋ᴀᵀ`.

mod boundary;
mod cholesky;
mod gram;
mod operator;

pub use boundary::{AugmentedBoundary, ChangeRun, InteriorBlock};
pub use cholesky::BandedCholesky;
pub use gram::{boundary_load, run_load, BlockedGram};
pub use operator::{binomial, gram_entry, DifferenceOperator};
