//! Counter-based seed derivation for reproducible, parallel-safe trials.
//!
//! A master seed keys the ChaCha8 stream cipher; each trial gets its own
//! stream index. Trials are therefore independent of scheduling: running
//! them in any order, or in parallel, produces identical draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for one trial: `ChaCha8(seed = master, stream = trial)`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
