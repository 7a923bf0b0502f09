//! Deterministic substream RNG for Monte Carlo trials.
//!
//! Trial `t` of a run seeded with `seed` always draws from the same
//! ChaCha stream `(seed, t)`, so estimates are bit-identical no matter
//! how trials are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for one Monte Carlo trial, independent of every other trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Derives a per-cell seed for sweep grids so each (N, eps) cell gets
/// its own trial substreams.
pub fn cell_seed(seed: u64, cell: u64) -> u64 {
    // splitmix64 step on seed ^ cell keeps cells decorrelated
    let mut z = seed ^ cell.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
