//! Deterministic random substreams.
//!
//! Every stochastic consumer in a simulation (per-link loss, per-flow
//! payloads, per-node nonces, per-attacker choices) draws from its own
//! ChaCha stream keyed by the root seed and a stable consumer label, so
//! adding or removing one consumer never perturbs the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// 64-bit FNV-1a over the consumer label; hand-rolled so the mapping can
/// never drift with a library version.
pub fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in s.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Independent deterministic stream for `consumer` under `root_seed`.
pub fn substream(root_seed: u64, consumer: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(root_seed ^ fnv1a(consumer))
}
