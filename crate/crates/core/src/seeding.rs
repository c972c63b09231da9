//! Reproducible random initial values.
//!
//! Each index draws from its own ChaCha8 stream of the same seed, so the
//! value for edge `e` does not depend on how many other values are drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform_at(seed: u64, index: usize, lo: f64, hi: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo..hi)
}

pub fn uniform_per_index(seed: u64, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| uniform_at(seed, i, lo, hi)).collect()
}
