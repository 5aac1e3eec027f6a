//! Cha–Cheon identity-based signatures with blind key extraction.
//!
//! Identities hash into `G1`; the master public key lives in `G2`.
//! Extraction is blinded multiplicatively so the key issuer never sees
//! the identity it certifies.

use std::fmt;

use ark_ec::PrimeGroup;
use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{SignatureError, IBS_TAG};
use crate::algebra::{hash_to_g1, hash_to_scalar, hex_elem, Codec, G1Element, G2Element, PairingContext, Scalar};

const IDENTITY_TAG: &[u8] = b"HIDM/ibs-id";

/// `Q_ID`, the identity point.
pub fn identity_point(identity: &[u8]) -> G1Element {
    hash_to_g1(IDENTITY_TAG, identity)
}

#[derive(Clone)]
pub struct IbsMasterKey {
    secret: Scalar,
    public: G2Element,
}

impl fmt::Debug for IbsMasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IbsMasterKey")
            .field("public", &self.public.to_hex())
            .finish_non_exhaustive()
    }
}

impl IbsMasterKey {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let ctx = PairingContext::global();
        let secret = ctx.random_nonzero_scalar(rng);
        IbsMasterKey {
            secret,
            public: ctx.g2 * secret,
        }
    }

    pub fn public(&self) -> &G2Element {
        &self.public
    }

    /// Issuer half of blind extraction: `d' = s · Q'`.
    pub fn extract_blinded(&self, blinded: &G1Element) -> Result<G1Element, SignatureError> {
        if blinded.is_zero() {
            return Err(SignatureError::IdentityElement);
        }
        Ok(*blinded * self.secret)
    }

    /// Non-blind extraction `s · Q_ID`.
    pub fn extract_direct(&self, identity: &[u8]) -> IbsUserKey {
        IbsUserKey {
            identity: identity.to_vec(),
            key: identity_point(identity) * self.secret,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct IbsUserKey {
    identity: Vec<u8>,
    key: G1Element,
}

impl fmt::Debug for IbsUserKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IbsUserKey")
            .field("identity", &hex::encode(&self.identity))
            .finish_non_exhaustive()
    }
}

impl IbsUserKey {
    pub fn identity(&self) -> &[u8] {
        &self.identity
    }

    pub fn point(&self) -> &G1Element {
        &self.key
    }

    /// `e(d, g2) == e(Q_ID, mpk)`.
    pub fn is_valid_for(&self, mpk: &G2Element) -> bool {
        let ctx = PairingContext::global();
        let q = identity_point(&self.identity);
        ctx.multi_pairing(&[self.key, -q], &[ctx.g2, *mpk]).is_zero()
    }
}

/// User state for blind extraction.
pub struct BlindExtraction {
    identity: Vec<u8>,
    unblinder: Scalar,
    blinded: G1Element,
}

impl BlindExtraction {
    /// Picks a blinder `b` and computes `Q' = b · Q_ID`.
    pub fn start<R: RngCore + CryptoRng>(identity: &[u8], rng: &mut R) -> Self {
        let ctx = PairingContext::global();
        let b = ctx.random_nonzero_scalar(rng);
        let unblinder = b.inverse().expect("nonzero scalar");
        BlindExtraction {
            identity: identity.to_vec(),
            unblinder,
            blinded: identity_point(identity) * b,
        }
    }

    /// The only value the issuer sees.
    pub fn request(&self) -> &G1Element {
        &self.blinded
    }

    /// `d = b^-1 · d'`, checked against the master public key.
    pub fn finish(self, response: &G1Element, mpk: &G2Element) -> Result<IbsUserKey, SignatureError> {
        let key = IbsUserKey {
            identity: self.identity,
            key: *response * self.unblinder,
        };
        if key.is_valid_for(mpk) {
            Ok(key)
        } else {
            Err(SignatureError::BadExtractedKey)
        }
    }
}

/// Runs both extraction messages locally; returns the key and the
/// issuer's view `Q'`.
pub fn blind_extract<R: RngCore + CryptoRng>(
    identity: &[u8],
    master: &IbsMasterKey,
    rng: &mut R,
) -> Result<(IbsUserKey, G1Element), SignatureError> {
    let req = BlindExtraction::start(identity, rng);
    let view = *req.request();
    let resp = master.extract_blinded(&view)?;
    Ok((req.finish(&resp, master.public())?, view))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename = "ibs-cha-cheon")]
pub struct IbsSignature {
    #[serde(with = "hex_elem")]
    pub u: G1Element,
    #[serde(with = "hex_elem")]
    pub v: G1Element,
}

fn challenge(msg: &[u8], u: &G1Element) -> Scalar {
    let mut input = msg.to_vec();
    input.extend_from_slice(&u.to_bytes());
    hash_to_scalar(IBS_TAG, &input)
}

pub fn sign<R: RngCore + CryptoRng>(msg: &[u8], key: &IbsUserKey, rng: &mut R) -> IbsSignature {
    let ctx = PairingContext::global();
    let a = ctx.random_nonzero_scalar(rng);
    let u = identity_point(&key.identity) * a;
    let h = challenge(msg, &u);
    IbsSignature { u, v: key.key * (a + h) }
}

/// Accepts iff `e(V, g2) == e(U + h·Q_ID, mpk)`.
pub fn verify(msg: &[u8], sig: &IbsSignature, identity: &[u8], mpk: &G2Element) -> bool {
    if sig.u.is_zero() || mpk.is_zero() {
        return false;
    }
    let ctx = PairingContext::global();
    let h = challenge(msg, &sig.u);
    let lhs = sig.u + identity_point(identity) * h;
    ctx.multi_pairing(&[sig.v, -lhs], &[G2Element::generator(), *mpk])
        .is_zero()
}
