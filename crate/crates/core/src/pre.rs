//! Pairing-based proxy re-encryption pseudonyms.
//!
//! A patient holding `x` (with `pk = x·g2`) encodes its identifier hash
//! `h` as the pseudonym `(P1, P2) = (z^(r+h), r·pk)` and hands out the
//! re-encryption key `rk = x^-1·pk_hrr`. A healthcare organization turns
//! the pseudonym into `(P1, e(rk, P2)) = (z^(r+h), z^(r·y))` without
//! learning anything, and only the record repository (holding `y`) can strip
//! the blinding to get `z^h`, which keys the encryption of the identifier.
//!
//! `z^h` is deterministic per patient; it never leaves this module except
//! inside `P1`, blinded by `z^r`.

use std::fmt;

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes256Gcm, Nonce};
use ark_ff::{Field, Zero};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use thiserror::Error;

use crate::algebra::{hash_to_scalar, hex_bytes, hex_elem, Codec, G1Element, G2Element, GtElement, PairingContext, Scalar};

/// Deployment-wide HKDF salt.
pub const SYSTEM_SALT: [u8; 32] = *b"hidm-simulation-system-salt-0001";
pub const DERIVATION_INFO: &[u8] = b"HIDM-PRE-PatientID-Derivation-v1";
const PATIENT_ID_TAG: &[u8] = b"HIDM/patient-id";
const NONCE_LEN: usize = 12;
const TAG_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreError {
    #[error("invalid re-encryption key")]
    InvalidReKey,
    #[error("ciphertext/pseudonym mismatch")]
    Mismatch,
}

/// `h = H(PatientID)` as a scalar.
pub fn patient_id_hash(patient_id: &[u8]) -> Scalar {
    hash_to_scalar(PATIENT_ID_TAG, patient_id)
}

/// HKDF-SHA256 over the canonical encoding of a `GT` element.
pub fn derive_key(id_gt: &GtElement, salt: &[u8; 32], info: &[u8]) -> [u8; 32] {
    let hk = Hkdf::<Sha256>::new(Some(salt), &id_gt.to_bytes());
    let mut okm = [0u8; 32];
    hk.expand(info, &mut okm).expect("32 bytes is a valid HKDF length");
    okm
}

#[derive(Clone)]
pub struct PrePatientKeys {
    x: Scalar,
    public: G2Element,
}

impl fmt::Debug for PrePatientKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrePatientKeys").field("public", &self.public.to_hex()).finish_non_exhaustive()
    }
}

impl PrePatientKeys {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let ctx = PairingContext::global();
        let x = ctx.random_nonzero_scalar(rng);
        PrePatientKeys { x, public: ctx.g2 * x }
    }

    pub fn public(&self) -> &G2Element {
        &self.public
    }
}

#[derive(Clone)]
pub struct PreHrrKeys {
    y: Scalar,
    public: G1Element,
}

impl fmt::Debug for PreHrrKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreHrrKeys").field("public", &self.public.to_hex()).finish_non_exhaustive()
    }
}

impl PreHrrKeys {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let ctx = PairingContext::global();
        let y = ctx.random_nonzero_scalar(rng);
        PreHrrKeys { y, public: ctx.g1 * y }
    }

    pub fn public(&self) -> &G1Element {
        &self.public
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pseudonym {
    #[serde(with = "hex_elem")]
    pub p1: GtElement,
    #[serde(with = "hex_elem")]
    pub p2: G2Element,
}

impl Pseudonym {
    /// `enc(P1) || enc(P2)`, 672 bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.p1.to_bytes();
        out.extend(self.p2.to_bytes());
        out
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

/// Pseudonym access information handed to a healthcare organization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pai {
    #[serde(flatten)]
    pub pseudonym: Pseudonym,
    #[serde(with = "hex_elem")]
    pub rk: G1Element,
    #[serde(with = "hex_bytes")]
    pub ct: Vec<u8>,
    #[serde(with = "hex_elem")]
    pub pk_patient: G2Element,
}

/// The nonce and identifier hash behind a pseudonym; kept by the patient
/// to prove the binding.
#[derive(Clone)]
pub struct PseudonymWitness {
    pub r: Scalar,
    pub h: Scalar,
}

impl fmt::Debug for PseudonymWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PseudonymWitness(..)")
    }
}

/// Pseudonym re-targeted to the record repository. Nothing accepts it as
/// input except [`hrr_recover`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HrrPseudonym {
    #[serde(with = "hex_elem")]
    pub q1: GtElement,
    #[serde(with = "hex_elem")]
    pub q2: GtElement,
}

fn encrypt<R: RngCore + CryptoRng>(key: &[u8; 32], plaintext: &[u8], rng: &mut R) -> Vec<u8> {
    let cipher = Aes256Gcm::new(key.into());
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let body = cipher
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .expect("in-memory encryption cannot fail");
    let mut out = nonce.to_vec();
    out.extend(body);
    out
}

fn decrypt(key: &[u8; 32], ct: &[u8]) -> Result<Vec<u8>, PreError> {
    if ct.len() < NONCE_LEN + TAG_LEN {
        return Err(PreError::Mismatch);
    }
    let (nonce, body) = ct.split_at(NONCE_LEN);
    Aes256Gcm::new(key.into())
        .decrypt(Nonce::from_slice(nonce), body)
        .map_err(|_| PreError::Mismatch)
}

/// Fresh pseudonym, re-encryption key and identifier ciphertext.
pub fn pseudonym_generate<R: RngCore + CryptoRng>(
    patient_id: &[u8],
    keys: &PrePatientKeys,
    pk_hrr: &G1Element,
    rng: &mut R,
) -> (Pai, PseudonymWitness) {
    let r = PairingContext::global().random_scalar(rng);
    pseudonym_generate_with_nonce(patient_id, keys, pk_hrr, r, rng)
}

/// As [`pseudonym_generate`] with a caller-chosen nonce `r`.
pub fn pseudonym_generate_with_nonce<R: RngCore + CryptoRng>(
    patient_id: &[u8],
    keys: &PrePatientKeys,
    pk_hrr: &G1Element,
    r: Scalar,
    rng: &mut R,
) -> (Pai, PseudonymWitness) {
    let ctx = PairingContext::global();
    let h = patient_id_hash(patient_id);
    let pseudonym = Pseudonym {
        p1: ctx.z_pow(&(r + h)),
        p2: keys.public * r,
    };
    let x_inv = keys.x.inverse().expect("x is nonzero");
    let key = derive_key(&ctx.z_pow(&h), &SYSTEM_SALT, DERIVATION_INFO);
    let pai = Pai {
        pseudonym,
        rk: *pk_hrr * x_inv,
        ct: encrypt(&key, patient_id, rng),
        pk_patient: keys.public,
    };
    (pai, PseudonymWitness { r, h })
}

/// `e(rk, pk_patient) == e(pk_hrr, g2)`.
pub fn rk_check(rk: &G1Element, pk_patient: &G2Element, pk_hrr: &G1Element) -> bool {
    if rk.is_zero() || pk_patient.is_zero() || pk_hrr.is_zero() {
        return false;
    }
    let ctx = PairingContext::global();
    ctx.multi_pairing(&[*rk, -*pk_hrr], &[*pk_patient, ctx.g2]).is_zero()
}

/// Healthcare-organization transformation `(P1, e(rk, P2))`.
pub fn transform_to_hrr(pai: &Pai, pk_hrr: &G1Element) -> Result<HrrPseudonym, PreError> {
    if !rk_check(&pai.rk, &pai.pk_patient, pk_hrr) {
        return Err(PreError::InvalidReKey);
    }
    let ctx = PairingContext::global();
    Ok(HrrPseudonym {
        q1: pai.pseudonym.p1,
        q2: ctx.pairing(&pai.rk, &pai.pseudonym.p2),
    })
}

/// Recovers the identifier: `z^h = Q1 / Q2^(1/y)`, then decrypts.
pub fn hrr_recover(hp: &HrrPseudonym, ct: &[u8], keys: &PreHrrKeys, salt: &[u8; 32]) -> Result<Vec<u8>, PreError> {
    let y_inv = keys.y.inverse().expect("y is nonzero");
    let id_gt = hp.q1 - hp.q2 * y_inv;
    decrypt(&derive_key(&id_gt, salt, DERIVATION_INFO), ct)
}
