//! Deterministic per-sample random streams.
//!
//! Every Monte Carlo sample owns a ChaCha20 stream keyed from
//! (master_seed, sample_id) through SplitMix64, so a sample can be
//! regenerated in isolation and results never depend on worker scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name and version of the generator, recorded in run manifests.
pub const GENERATOR: &str =
    "ChaCha20 (rand_chacha 0.9) keyed by SplitMix64; normals by Ziggurat StandardNormal (rand_distr 0.5)";

/// Bit-exact description of the per-sample seed derivation.
pub const SEED_RULE: &str = "sample_seed = splitmix64(master_seed XOR splitmix64(sample_id)); \
     ChaCha20 key = little-endian bytes of s1..s4 where s_k = splitmix64(sample_seed + (k-1)*0x9E3779B97F4A7C15); \
     splitmix64(x): z = x + 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; \
     z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31 (wrapping u64 arithmetic)";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 step applied to `x` (increment, then finalize).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample_seed(master_seed: u64, sample_id: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(sample_id))
}

pub fn sample_rng(master_seed: u64, sample_id: u64) -> ChaCha20Rng {
    let s = sample_seed(master_seed, sample_id);
    let mut key = [0u8; 32];
    for (k, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(s.wrapping_add((k as u64).wrapping_mul(GOLDEN)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha20Rng::from_seed(key)
}
