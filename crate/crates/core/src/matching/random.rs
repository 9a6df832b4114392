//! Seeded random re-pairing used by the permutation interventions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    /// `order[i]` is the original position whose item moves into slot `i`.
    pub order: Vec<usize>,
    /// True when fewer than two items exist and nothing can move.
    pub no_op: bool,
}

impl Permutation {
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.order.iter().map(|&k| items[k].clone()).collect()
    }
}

/// Uniform Fisher-Yates permutation of `len` items. With exactly two items
/// the identity is re-drawn, so the pair always swaps.
pub fn randomized_matching(len: usize, seed: u64) -> Permutation {
    let mut order: Vec<usize> = (0..len).collect();
    if len < 2 {
        return Permutation { order, no_op: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    while len == 2 && order == [0, 1] {
        order.shuffle(&mut rng);
    }
    Permutation { order, no_op: false }
}
