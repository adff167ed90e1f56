// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;

/// Generator for replicate `k` of an experiment seeded with `seed`.
pub fn replicate_rng(seed: u64, k: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed ^ k)
}

/// `len` independent standard normal draws.
pub fn standard_normals(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = standard_normals(&mut replicate_rng(7, 3), 50);
        let b = standard_normals(&mut replicate_rng(7, 3), 50);
        assert_eq!(a, b);
        let c = standard_normals(&mut replicate_rng(7, 4), 50);
        assert_ne!(a, c);
    }
}
