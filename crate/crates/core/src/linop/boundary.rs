// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::{PrutfError, Result};

/// One detected change in dual coordinates.
///
/// The change at dual coordinate `tau` owns the boundary run
/// `tau − r_b ..= tau` and the augmented run `tau − r_b ..= tau + r_a`,
/// all carrying `sign`. A sign of 0 marks a run neutralised by the
/// staircase correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChangeRun {
    pub tau: usize,
    pub sign: i8,
}

/// Maximal run of consecutive interior (non-augmented) dual coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorBlock {
    pub start: usize,
    pub len: usize,
}

/// The boundary set `B`, augmented boundary set `A` and their signs,
/// stored as an ordered list of disjoint change runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AugmentedBoundary {
    m: usize,
    r: usize,
    runs: Vec<ChangeRun>,
}

impl AugmentedBoundary {
    pub fn empty(m: usize, r: usize) -> Self {
        Self {
            m,
            r,
            runs: Vec::new(),
        }
    }

    /// Builds a boundary from change runs, validating placement and spacing.
    pub fn from_runs(m: usize, r: usize, runs: impl IntoIterator<Item = ChangeRun>) -> Result<Self> {
        let mut out = Self::empty(m, r);
        for run in runs {
            if !out.can_insert(run.tau) {
                return Err(PrutfError::InvalidConfig(format!(
                    "change at dual coordinate {} does not fit (m = {m}, r = {r})",
                    run.tau
                )));
            }
            out.insert_unchecked(run);
        }
        Ok(out)
    }

    pub fn dual_len(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn r_a(&self) -> usize {
        (self.r + 1) / 2
    }

    pub fn r_b(&self) -> usize {
        self.r / 2
    }

    pub fn runs(&self) -> &[ChangeRun] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// `|A|`.
    pub fn augmented_len(&self) -> usize {
        self.runs.len() * (self.r + 1)
    }

    /// `m − |A|`.
    pub fn interior_len(&self) -> usize {
        self.m - self.augmented_len()
    }

    /// Augmented span `(first, last)` of a change at `tau`, if it fits in `[0, m)`.
    pub fn span(&self, tau: usize) -> Option<(usize, usize)> {
        let first = tau.checked_sub(self.r_b())?;
        let last = tau + self.r_a();
        (last < self.m).then_some((first, last))
    }

    /// Whether a new change at `tau` fits without touching an existing run.
    pub fn can_insert(&self, tau: usize) -> bool {
        let Some((first, last)) = self.span(tau) else {
            return false;
        };
        let idx = self.runs.partition_point(|run| run.tau < tau);
        let clear_before = idx == 0 || {
            let (_, prev_last) = self.span(self.runs[idx - 1].tau).expect("stored runs fit");
            prev_last < first
        };
        let clear_after = idx == self.runs.len() || {
            let (next_first, _) = self.span(self.runs[idx].tau).expect("stored runs fit");
            last < next_first
        };
        clear_before && clear_after
    }

    pub fn insert(&mut self, tau: usize, sign: i8) -> Result<()> {
        if !self.can_insert(tau) {
            return Err(PrutfError::InvalidConfig(format!(
                "change at dual coordinate {tau} overlaps an existing run or an edge"
            )));
        }
        self.insert_unchecked(ChangeRun { tau, sign });
        Ok(())
    }

    fn insert_unchecked(&mut self, run: ChangeRun) {
        let idx = self.runs.partition_point(|other| other.tau < run.tau);
        self.runs.insert(idx, run);
    }

    /// Removes the change at `tau`, returning it.
    pub fn remove(&mut self, tau: usize) -> Option<ChangeRun> {
        let idx = self.runs.binary_search_by_key(&tau, |run| run.tau).ok()?;
        Some(self.runs.remove(idx))
    }

    pub fn set_sign(&mut self, tau: usize, sign: i8) -> bool {
        match self.runs.binary_search_by_key(&tau, |run| run.tau) {
            Ok(idx) => {
                self.runs[idx].sign = sign;
                true
            }
            Err(_) => false,
        }
    }

    /// Index of the run whose augmented span covers dual coordinate `i`.
    pub fn run_covering(&self, i: usize) -> Option<usize> {
        let idx = self.runs.partition_point(|run| run.tau + self.r_a() < i);
        let run = self.runs.get(idx)?;
        (run.tau - self.r_b() <= i).then_some(idx)
    }

    pub fn in_augmented(&self, i: usize) -> bool {
        self.run_covering(i).is_some()
    }

    pub fn in_boundary(&self, i: usize) -> bool {
        self.run_covering(i).is_some_and(|idx| i <= self.runs[idx].tau)
    }

    /// Boundary coordinates `B` in increasing order.
    pub fn boundary(&self) -> Vec<usize> {
        self.runs
            .iter()
            .flat_map(|run| run.tau - self.r_b()..=run.tau)
            .collect()
    }

    /// Signs `s_B` aligned with [`Self::boundary`].
    pub fn boundary_signs(&self) -> Vec<i8> {
        self.runs
            .iter()
            .flat_map(|run| std::iter::repeat_n(run.sign, self.r_b() + 1))
            .collect()
    }

    /// Augmented coordinates `A` in increasing order.
    pub fn augmented(&self) -> Vec<usize> {
        self.runs
            .iter()
            .flat_map(|run| run.tau - self.r_b()..=run.tau + self.r_a())
            .collect()
    }

    /// Signs `s_A` aligned with [`Self::augmented`].
    pub fn augmented_signs(&self) -> Vec<i8> {
        self.runs
            .iter()
            .flat_map(|run| std::iter::repeat_n(run.sign, self.r + 1))
            .collect()
    }

    /// The `J + 1` interior blocks between consecutive runs; empty blocks are kept.
    pub fn interior_blocks(&self) -> Vec<InteriorBlock> {
        let mut blocks = Vec::with_capacity(self.runs.len() + 1);
        let mut start = 0;
        for run in &self.runs {
            let first = run.tau - self.r_b();
            blocks.push(InteriorBlock {
                start,
                len: first - start,
            });
            start = run.tau + self.r_a() + 1;
        }
        blocks.push(InteriorBlock {
            start,
            len: self.m - start,
        });
        blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_example_sets() {
        // r = 2 with changes at dual 6 and 13 (1-based): A = {5,6,7,12,13,14}.
        let mut a = AugmentedBoundary::empty(17, 2);
        a.insert(5, 1).unwrap();
        a.insert(12, -1).unwrap();
        let one_based = |v: Vec<usize>| v.into_iter().map(|i| i + 1).collect::<Vec<_>>();
        assert_eq!(one_based(a.boundary()), vec![5, 6, 12, 13]);
        assert_eq!(a.boundary_signs(), vec![1, 1, -1, -1]);
        assert_eq!(one_based(a.augmented()), vec![5, 6, 7, 12, 13, 14]);
        assert_eq!(a.augmented_signs(), vec![1, 1, 1, -1, -1, -1]);
        assert_eq!(a.interior_len(), 11);
    }

    #[test]
    fn spacing_and_edges() {
        let mut a = AugmentedBoundary::empty(20, 1);
        assert!(!a.can_insert(19), "run would leave [0, m)");
        a.insert(5, 1).unwrap(); // occupies 5, 6
        assert!(!a.can_insert(4));
        assert!(!a.can_insert(6));
        assert!(a.can_insert(3));
        assert!(a.can_insert(7));
        assert!(a.insert(6, -1).is_err());
        assert_eq!(a.run_covering(6), Some(0));
        assert!(a.in_boundary(5) && !a.in_boundary(6) && a.in_augmented(6));
    }

    #[test]
    fn blocks_cover_interior() {
        let a = AugmentedBoundary::from_runs(
            30,
            3,
            [ChangeRun { tau: 4, sign: 1 }, ChangeRun { tau: 9, sign: -1 }],
        )
        .unwrap();
        let blocks = a.interior_blocks();
        assert_eq!(
            blocks,
            vec![
                InteriorBlock { start: 0, len: 3 },
                InteriorBlock { start: 7, len: 1 },
                InteriorBlock { start: 12, len: 18 },
            ]
        );
        assert_eq!(blocks.iter().map(|b| b.len).sum::<usize>(), a.interior_len());
        let adjacent = AugmentedBoundary::from_runs(
            12,
            1,
            [ChangeRun { tau: 2, sign: 1 }, ChangeRun { tau: 4, sign: 1 }],
        )
        .unwrap();
        assert_eq!(adjacent.interior_blocks()[1].len, 0);
    }
}
