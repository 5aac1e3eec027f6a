//! Pseudonym binding proof: shows that `(P1, P2) = (z^(r+h), r·pk)` for
//! the identifier hash `h` the verifier computed itself, without revealing
//! `r`.
//!
//! ```text
//! T1 = z^t1,  T2 = t2·pk,  c = H(P1, P2, T1, T2, pk, h)
//! s1 = t1 + c·r,  s2 = t2 + c·r
//! accept iff z^s1 = T1 · (P1 / z^h)^c  and  s2·pk = T2 + c·P2
//! ```
//!
//! In [`PbpMode::AsWritten`] the two equations use independent nonces, so
//! they do not force the same `r` into `P1` and `P2`. [`PbpMode::Strict`]
//! uses one nonce and requires `s1 == s2`, which does.

use ark_ff::Zero;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::algebra::{hash_to_scalar, hex_elem, Codec, G2Element, GtElement, PairingContext, Scalar};
use crate::pre::Pseudonym;

const PBP_TAG: &[u8] = b"HIDM/pbp";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PbpMode {
    #[default]
    AsWritten,
    Strict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename = "pbp")]
pub struct PbProof {
    #[serde(with = "hex_elem")]
    pub t1: GtElement,
    #[serde(with = "hex_elem")]
    pub t2: G2Element,
    #[serde(with = "hex_elem")]
    pub c: Scalar,
    #[serde(with = "hex_elem")]
    pub s1: Scalar,
    #[serde(with = "hex_elem")]
    pub s2: Scalar,
}

/// `H(P1 || P2 || T1 || T2 || pk || h)`.
pub fn challenge(pseudonym: &Pseudonym, t1: &GtElement, t2: &G2Element, pk: &G2Element, h: &Scalar) -> Scalar {
    let mut input = pseudonym.to_bytes();
    input.extend(t1.to_bytes());
    input.extend(t2.to_bytes());
    input.extend(pk.to_bytes());
    input.extend(h.to_bytes());
    hash_to_scalar(PBP_TAG, &input)
}

pub fn prove<R: RngCore + CryptoRng>(
    pseudonym: &Pseudonym,
    r: &Scalar,
    h: &Scalar,
    pk: &G2Element,
    mode: PbpMode,
    rng: &mut R,
) -> PbProof {
    let ctx = PairingContext::global();
    let t1 = ctx.random_scalar(rng);
    let t2 = match mode {
        PbpMode::AsWritten => ctx.random_scalar(rng),
        PbpMode::Strict => t1,
    };
    prove_with_nonces(pseudonym, r, r, h, pk, t1, t2)
}

/// Prover with explicit nonces, and separate witnesses for the `GT` and
/// `G2` equations (equal for an honest pseudonym).
pub fn prove_with_nonces(
    pseudonym: &Pseudonym,
    r_gt: &Scalar,
    r_g2: &Scalar,
    h: &Scalar,
    pk: &G2Element,
    t1: Scalar,
    t2: Scalar,
) -> PbProof {
    let ctx = PairingContext::global();
    let big_t1 = ctx.z_pow(&t1);
    let big_t2 = *pk * t2;
    let c = challenge(pseudonym, &big_t1, &big_t2, pk, h);
    PbProof {
        t1: big_t1,
        t2: big_t2,
        c,
        s1: t1 + c * r_gt,
        s2: t2 + c * r_g2,
    }
}

pub fn verify(pseudonym: &Pseudonym, proof: &PbProof, pk: &G2Element, h: &Scalar, mode: PbpMode) -> bool {
    if pk.is_zero() || (mode == PbpMode::Strict && proof.s1 != proof.s2) {
        return false;
    }
    let ctx = PairingContext::global();
    let c = challenge(pseudonym, &proof.t1, &proof.t2, pk, h);
    if c != proof.c {
        return false;
    }
    let blinded = pseudonym.p1 - ctx.z_pow(h);
    ctx.z_pow(&proof.s1) == proof.t1 + blinded * c && *pk * proof.s2 == proof.t2 + pseudonym.p2 * c
}
