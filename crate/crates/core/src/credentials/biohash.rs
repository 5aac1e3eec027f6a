//! Random-hyperplane locality-sensitive hash of a biometric feature vector.
//!
//! Each of the 256 output bits is the sign of the projection onto a
//! Gaussian hyperplane drawn from a seeded generator. Nearby vectors
//! disagree on few bits, so matching is a Hamming-distance threshold.
//! Simulation-grade only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::CredentialError;

pub const HASH_BITS: usize = 256;
pub type BioHash = [u8; HASH_BITS / 8];

#[derive(Clone, Debug)]
pub struct BioHashParams {
    pub dimension: usize,
    pub threshold: u32,
    pub seed: u64,
    hyperplanes: Vec<Vec<f64>>,
}

/// Serializable description from which hyperplanes are rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioHashConfig {
    pub dimension: usize,
    pub threshold: u32,
    pub seed: u64,
}

impl Default for BioHashConfig {
    fn default() -> Self {
        BioHashConfig {
            dimension: 128,
            threshold: 32,
            seed: 0x4249_4f48_4153_4801,
        }
    }
}

impl Default for BioHashParams {
    fn default() -> Self {
        BioHashParams::new(BioHashConfig::default())
    }
}

impl BioHashParams {
    pub fn new(config: BioHashConfig) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let hyperplanes = (0..HASH_BITS)
            .map(|_| (0..config.dimension).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        BioHashParams {
            dimension: config.dimension,
            threshold: config.threshold,
            seed: config.seed,
            hyperplanes,
        }
    }

    pub fn config(&self) -> BioHashConfig {
        BioHashConfig {
            dimension: self.dimension,
            threshold: self.threshold,
            seed: self.seed,
        }
    }

    pub fn enroll(&self, features: &[f64]) -> Result<BioHash, CredentialError> {
        if features.len() != self.dimension {
            return Err(CredentialError::DimensionMismatch {
                expected: self.dimension,
                got: features.len(),
            });
        }
        let mut out = [0u8; HASH_BITS / 8];
        for (i, plane) in self.hyperplanes.iter().enumerate() {
            let dot: f64 = plane.iter().zip(features).map(|(a, b)| a * b).sum();
            if dot > 0.0 {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        Ok(out)
    }

    /// `false` for malformed live samples.
    pub fn matches(&self, enrolled: &BioHash, live: &[f64]) -> bool {
        match self.enroll(live) {
            Ok(h) => hamming(enrolled, &h) <= self.threshold,
            Err(_) => false,
        }
    }

    /// Synthetic enrolment sample with standard-normal features.
    pub fn random_features<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dimension).map(|_| StandardNormal.sample(rng)).collect()
    }
}

pub fn hamming(a: &BioHash, b: &BioHash) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// `features + N(0, sigma^2)` per coordinate.
pub fn add_noise<R: Rng>(features: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    features.iter().map(|f| f + noise.sample(rng)).collect()
}
