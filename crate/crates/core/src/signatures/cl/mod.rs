//! Camenisch–Lysyanskaya signatures over blocks of attributes, in two
//! variants at 128-bit strength:
//!
//! * [`ClVariant::Pairing`]: the CL04 block-message scheme on BLS12-381.
//! * [`ClVariant::Rsa`]: the strong-RSA CL02 scheme with a 3072-bit modulus.
//!
//! Byte-string attributes are mapped to integers below the pairing group
//! order with their slot index, so both variants sign the same numbers and
//! reordering attributes changes every message.

pub mod pairing;
pub mod rsa;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::SignatureError;
use crate::algebra::{hash_to_field, PairingContext};

pub use self::pairing::{ClPairingKeypair, ClPairingPublic, ClPairingSignature};
pub use self::rsa::{ClRsaKeypair, ClRsaPublic, ClRsaSignature};

const ATTRIBUTE_TAG: &[u8] = b"HIDM/cl-attr";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClVariant {
    #[serde(rename = "cl-rsa")]
    Rsa,
    #[serde(rename = "cl-pairing")]
    Pairing,
}

impl std::str::FromStr for ClVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cl-rsa" | "CL-RSA" => Ok(ClVariant::Rsa),
            "cl-pairing" | "CL-pairing" | "CL-Bilinear" => Ok(ClVariant::Pairing),
            other => Err(format!("unknown CL variant {other:?}")),
        }
    }
}

/// Maps the attribute in `slot` to its signed integer, `< r`.
pub fn encode_attribute(slot: usize, value: &[u8]) -> BigUint {
    let mut input = (slot as u32).to_be_bytes().to_vec();
    input.extend_from_slice(value);
    hash_to_field(ATTRIBUTE_TAG, &input, &PairingContext::global().order)
}

pub fn encode_attributes<A: AsRef<[u8]>>(attrs: &[A]) -> Vec<BigUint> {
    attrs
        .iter()
        .enumerate()
        .map(|(i, a)| encode_attribute(i, a.as_ref()))
        .collect()
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum ClKeypair {
    Rsa(ClRsaKeypair),
    Pairing(ClPairingKeypair),
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ClPublicKey {
    #[serde(rename = "cl-rsa")]
    Rsa(ClRsaPublic),
    #[serde(rename = "cl-pairing")]
    Pairing(ClPairingPublic),
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme")]
pub enum ClSignature {
    #[serde(rename = "cl-rsa")]
    Rsa(ClRsaSignature),
    #[serde(rename = "cl-pairing")]
    Pairing(ClPairingSignature),
}

impl ClSignature {
    /// Canonical byte length of the signature body.
    pub fn encoded_len(&self) -> usize {
        match self {
            ClSignature::Rsa(s) => s.to_bytes().len(),
            ClSignature::Pairing(s) => s.to_bytes().len(),
        }
    }

    pub fn variant(&self) -> ClVariant {
        match self {
            ClSignature::Rsa(_) => ClVariant::Rsa,
            ClSignature::Pairing(_) => ClVariant::Pairing,
        }
    }
}

impl ClKeypair {
    /// Fresh pairing keys, or strong-RSA keys over the embedded modulus
    /// `rsa_modulus_index`.
    pub fn generate<R: RngCore + CryptoRng>(variant: ClVariant, slots: usize, rng: &mut R) -> Self {
        Self::generate_indexed(variant, slots, 0, rng)
    }

    pub fn generate_indexed<R: RngCore + CryptoRng>(
        variant: ClVariant,
        slots: usize,
        rsa_modulus_index: usize,
        rng: &mut R,
    ) -> Self {
        match variant {
            ClVariant::Pairing => ClKeypair::Pairing(ClPairingKeypair::generate(slots, rng)),
            ClVariant::Rsa => {
                let modulus = self::rsa::SafeRsaModulus::reference(rsa_modulus_index);
                ClKeypair::Rsa(ClRsaKeypair::generate(modulus, slots, rng))
            }
        }
    }

    pub fn variant(&self) -> ClVariant {
        match self {
            ClKeypair::Rsa(_) => ClVariant::Rsa,
            ClKeypair::Pairing(_) => ClVariant::Pairing,
        }
    }

    pub fn slot_count(&self) -> usize {
        match self {
            ClKeypair::Rsa(k) => k.public().slot_count(),
            ClKeypair::Pairing(k) => k.public().slot_count(),
        }
    }

    pub fn public(&self) -> ClPublicKey {
        match self {
            ClKeypair::Rsa(k) => ClPublicKey::Rsa(k.public().clone()),
            ClKeypair::Pairing(k) => ClPublicKey::Pairing(k.public().clone()),
        }
    }

    pub fn sign<A: AsRef<[u8]>, R: RngCore + CryptoRng>(
        &self,
        attrs: &[A],
        rng: &mut R,
    ) -> Result<ClSignature, SignatureError> {
        self.sign_encoded(&encode_attributes(attrs), rng)
    }

    pub fn sign_encoded<R: RngCore + CryptoRng>(
        &self,
        msgs: &[BigUint],
        rng: &mut R,
    ) -> Result<ClSignature, SignatureError> {
        match self {
            ClKeypair::Rsa(k) => k.sign(msgs, rng).map(ClSignature::Rsa),
            ClKeypair::Pairing(k) => k.sign(msgs, rng).map(ClSignature::Pairing),
        }
    }

    /// Signs and verifies random attributes under the public key.
    pub fn self_test<R: RngCore + CryptoRng>(&self, rng: &mut R) -> bool {
        let attrs: Vec<[u8; 16]> = (0..self.slot_count())
            .map(|_| {
                let mut a = [0u8; 16];
                rng.fill_bytes(&mut a);
                a
            })
            .collect();
        match self.sign(&attrs, rng) {
            Ok(sig) => verify(&attrs, &sig, &self.public()),
            Err(_) => false,
        }
    }
}

impl ClPublicKey {
    pub fn variant(&self) -> ClVariant {
        match self {
            ClPublicKey::Rsa(_) => ClVariant::Rsa,
            ClPublicKey::Pairing(_) => ClVariant::Pairing,
        }
    }

    pub fn slot_count(&self) -> usize {
        match self {
            ClPublicKey::Rsa(k) => k.slot_count(),
            ClPublicKey::Pairing(k) => k.slot_count(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            ClPublicKey::Rsa(k) => k.to_bytes(),
            ClPublicKey::Pairing(k) => k.to_bytes(),
        }
    }
}

pub fn verify<A: AsRef<[u8]>>(attrs: &[A], sig: &ClSignature, public: &ClPublicKey) -> bool {
    verify_encoded(&encode_attributes(attrs), sig, public)
}

/// Mismatched variants never verify.
pub fn verify_encoded(msgs: &[BigUint], sig: &ClSignature, public: &ClPublicKey) -> bool {
    match (sig, public) {
        (ClSignature::Rsa(s), ClPublicKey::Rsa(k)) => self::rsa::verify(msgs, s, k),
        (ClSignature::Pairing(s), ClPublicKey::Pairing(k)) => self::pairing::verify(msgs, s, k),
        _ => false,
    }
}
