//! Schnorr signatures over the order-`q` subgroup of `Z_p*`.
//!
//! `R = g^k`, `c = H(R || m) mod q`, `s = k + c·x mod q`. Verification
//! recomputes `R = g^s · Y^-c`.

use std::fmt;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::SCHNORR_TAG;
use crate::algebra::{hash_to_field, hex_uint, SchnorrGroup};

#[derive(Clone)]
pub struct SchnorrKeypair {
    secret: BigUint,
    public: BigUint,
}

impl fmt::Debug for SchnorrKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchnorrKeypair")
            .field("public", &hex_uint::encode(&self.public))
            .finish_non_exhaustive()
    }
}

impl SchnorrKeypair {
    pub fn generate<R: RngCore + CryptoRng>(group: &SchnorrGroup, rng: &mut R) -> Self {
        let secret = group.random_exponent(rng);
        let public = group.exp_g(&secret);
        SchnorrKeypair { secret, public }
    }

    /// `None` unless `x` is in `[1, q)`.
    pub fn from_secret(group: &SchnorrGroup, x: BigUint) -> Option<Self> {
        if x == BigUint::from(0u8) || &x >= group.q() {
            return None;
        }
        let public = group.exp_g(&x);
        Some(SchnorrKeypair { secret: x, public })
    }

    pub fn public(&self) -> &BigUint {
        &self.public
    }

    pub(crate) fn secret(&self) -> &BigUint {
        &self.secret
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename = "schnorr")]
pub struct SchnorrSig {
    #[serde(with = "hex_uint")]
    pub c: BigUint,
    #[serde(with = "hex_uint")]
    pub s: BigUint,
}

/// `H(R || m) mod q`.
pub fn challenge(group: &SchnorrGroup, commitment: &BigUint, msg: &[u8]) -> BigUint {
    let mut input = group.encode(commitment);
    input.extend_from_slice(msg);
    hash_to_field(SCHNORR_TAG, &input, group.q())
}

/// `k + c·x mod q`.
pub fn respond(group: &SchnorrGroup, key: &SchnorrKeypair, nonce: &BigUint, c: &BigUint) -> BigUint {
    (nonce + c * key.secret()) % group.q()
}

pub fn sign<R: RngCore + CryptoRng>(
    group: &SchnorrGroup,
    key: &SchnorrKeypair,
    msg: &[u8],
    rng: &mut R,
) -> SchnorrSig {
    let nonce = group.random_exponent(rng);
    let commitment = group.exp_g(&nonce);
    let c = challenge(group, &commitment, msg);
    let s = respond(group, key, &nonce, &c);
    SchnorrSig { c, s }
}

/// `g^s · Y^-c`.
pub fn recover_commitment(group: &SchnorrGroup, public: &BigUint, c: &BigUint, s: &BigUint) -> BigUint {
    group.mul(&group.exp_g(s), &group.exp_neg(public, c))
}

pub fn verify(group: &SchnorrGroup, msg: &[u8], sig: &SchnorrSig, public: &BigUint) -> bool {
    if &sig.c >= group.q() || &sig.s >= group.q() || !group.contains(public) {
        return false;
    }
    let r = recover_commitment(group, public, &sig.c, &sig.s);
    challenge(group, &r, msg) == sig.c
}
