//! Per-trial random streams.
//!
//! Every random draw is keyed by `(master_seed, stream, point, trial)` and
//! folded through the SplitMix64 finalizer, so a trial's noise does not depend
//! on which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tag for the element phases of a grid point.
pub const PHASE_STREAM: u64 = 0x5048_4153_4553;
/// Stream tag for trial noise (and per-trial phases).
pub const TRIAL_STREAM: u64 = 0x5452_4941_4c53;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the key words into one 64-bit seed.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(master), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub fn phase_rng(master: u64, point: usize) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, &[PHASE_STREAM, point as u64]))
}

pub fn trial_rng(master: u64, point: usize, trial: usize) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, &[TRIAL_STREAM, point as u64, trial as u64]))
}
