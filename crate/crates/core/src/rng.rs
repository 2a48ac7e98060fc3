//! Deterministic per-trial random streams.
//!
//! Trial `i` of a run seeded with `master_seed` draws from ChaCha20 keyed by
//! `seed_from_u64(master_seed)` on stream `i`. ChaCha is counter based, so
//! every trial is reproducible in isolation and results do not depend on
//! how trials are spread over workers.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type TrialRng = ChaCha20Rng;

pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}
