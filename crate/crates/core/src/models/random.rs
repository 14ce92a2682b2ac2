//! Seeded doubly stochastic chain generator.
//!
//! Every step is a convex combination of `mix` uniformly drawn permutation
//! matrices with uniform-simplex weights, hence doubly stochastic by
//! construction and balanced asymmetric with constant 1. The generator is a
//! pure function of `(seed, s, n_end, mix)`: matrices are realized eagerly
//! from one seeded stream, so chains with equal parameters are identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// Hand-rolled Fisher-Yates so the draw sequence is pinned by this crate,
/// not by shuffle implementation details elsewhere.
fn random_permutation(s: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..s).collect();
    for i in (1..s).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

pub fn random_doubly_stochastic_chain(
    seed: u64,
    s: usize,
    n_end: usize,
    mix: usize,
) -> Result<Chain> {
    if s == 0 {
        return Err(Error::InvalidParams("order must be at least 1".into()));
    }
    if mix == 0 {
        return Err(Error::InvalidParams("mix must be at least 1".into()));
    }
    if n_end == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrices = Vec::with_capacity(n_end);
    for _ in 0..n_end {
        let mut entries = vec![0.0_f64; s * s];
        // Uniform simplex weights via normalized exponentials.
        let mut raw = Vec::with_capacity(mix);
        let mut total = 0.0;
        for _ in 0..mix {
            let u: f64 = rng.random();
            let e = -(1.0 - u).ln();
            raw.push(e);
            total += e;
        }
        for &e in &raw {
            let w = e / total;
            let perm = random_permutation(s, &mut rng);
            for (i, &j) in perm.iter().enumerate() {
                entries[i * s + j] += w;
            }
        }
        matrices.push(StochasticMatrix::from_flat(s, &entries, 1e-9)?);
    }
    Ok(Chain::from_matrices(matrices)?.with_label("random_doubly_stochastic"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{balanced_asymmetry_constant, is_doubly_stochastic};

    #[test]
    fn single_mix_yields_permutation_matrices() {
        let chain = random_doubly_stochastic_chain(7, 4, 10, 1).unwrap();
        for n in 0..10 {
            let m = chain.matrix_at(n).unwrap();
            for i in 0..4 {
                let ones = (0..4).filter(|&j| m.get(i, j) == 1.0).count();
                let zeros = (0..4).filter(|&j| m.get(i, j) == 0.0).count();
                assert_eq!((ones, zeros), (1, 3));
            }
        }
    }

    #[test]
    fn outputs_are_doubly_stochastic_with_unit_asymmetry_constant() {
        for seed in 0..25 {
            let s = 2 + (seed as usize % 5);
            let chain = random_doubly_stochastic_chain(seed, s, 5, 1 + seed as usize % 4).unwrap();
            for n in 0..5 {
                let m = chain.matrix_at(n).unwrap();
                assert!(is_doubly_stochastic(&m, 1e-9));
                let (ba, _) = balanced_asymmetry_constant(&m).unwrap();
                assert!(ba <= 1.0 + 1e-12, "seed {seed} step {n}: M = {ba}");
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_chain() {
        let a = random_doubly_stochastic_chain(42, 5, 8, 3).unwrap();
        let b = random_doubly_stochastic_chain(42, 5, 8, 3).unwrap();
        for n in 0..8 {
            assert_eq!(a.matrix_at(n).unwrap(), b.matrix_at(n).unwrap());
        }
        let c = random_doubly_stochastic_chain(43, 5, 8, 3).unwrap();
        assert_ne!(a.matrix_at(0).unwrap(), c.matrix_at(0).unwrap());
    }
}
