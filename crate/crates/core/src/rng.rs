//! Independent, reproducible random streams for Monte-Carlo trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream roles, so that e.g. the noise of one trial never shares
/// draws with its scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scene = 1,
    Combiner = 2,
    Noise = 3,
    Planted = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds `tags` into `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Generator for one (seed, role, trial, extra...) coordinate.
pub fn stream_rng(seed: u64, stream: Stream, trial: u64, extra: &[u64]) -> ChaCha8Rng {
    let mut tags = vec![stream as u64, trial];
    tags.extend_from_slice(extra);
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &tags))
}
