//! Seed fan-out: one global seed yields an independent stream per row.
//!
//! Row seeds are `splitmix64(global ^ splitmix64(row + 1))`, so tie-breaks
//! do not depend on the order in which rows are processed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Tag;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn row_seed(global: u64, row: u64) -> u64 {
    splitmix64(global ^ splitmix64(row.wrapping_add(1)))
}

pub fn row_rng(global: u64, row: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(row_seed(global, row as u64))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives a named sub-stream seed, e.g. for the corpus versus the ensemble.
pub fn substream(global: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(splitmix64(global), |acc, b| splitmix64(acc ^ u64::from(b)))
}

/// Uniform choice among tied winners. Winners are sorted first so the draw
/// depends only on the set and the stream.
pub fn break_tie<R: Rng + ?Sized>(mut winners: Vec<Tag>, rng: &mut R) -> Tag {
    assert!(!winners.is_empty(), "tie-break over an empty set");
    if winners.len() == 1 {
        return winners.pop().unwrap();
    }
    winners.sort();
    winners.dedup();
    winners.choose(rng).cloned().expect("non-empty winner set")
}
