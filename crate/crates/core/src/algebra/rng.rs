//! Randomness sources. Every scheme takes the generator as a parameter, so a
//! seeded [`HidmRng`] makes whole protocol transcripts reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::tagged_digest;

pub type HidmRng = ChaCha20Rng;

/// Environment variable selecting test-vector mode.
pub const SEED_ENV_VAR: &str = "HIDM_SEED";

pub fn seeded_rng(seed: u64) -> HidmRng {
    derive_rng(seed, "root")
}

/// Independent stream for a named sub-component, derived from a master seed.
pub fn derive_rng(seed: u64, label: &str) -> HidmRng {
    ChaCha20Rng::from_seed(tagged_digest(
        b"HIDM/rng",
        &[&seed.to_be_bytes(), label.as_bytes()],
    ))
}

/// Seeded from `HIDM_SEED` when set and parseable, otherwise from OS entropy.
pub fn rng_from_env() -> (HidmRng, Option<u64>) {
    match std::env::var(SEED_ENV_VAR).ok().and_then(|s| s.trim().parse().ok()) {
        Some(seed) => (seeded_rng(seed), Some(seed)),
        None => (ChaCha20Rng::from_entropy(), None),
    }
}
