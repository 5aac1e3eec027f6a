//! CL04 scheme C on a type-3 pairing.
//!
//! Keys: `X = x·g2`, `Y = y·g2`, `Z_i = z_i·g2` for slots `1..n`.
//! A signature on `(m_0, …, m_{n-1})` is
//! `(a, {A_i}, b, {B_i}, c)` with `a` random, `A_i = z_i·a`, `b = y·a`,
//! `B_i = y·A_i` and `c = x·(a + m_0·b + Σ m_i·B_i)`.
//!
//! Verification folds the `2n` structural equations and the main equation
//! into one multi-pairing with hash-derived 128-bit weights.

use std::fmt;

use ark_ec::PrimeGroup;
use ark_ff::{One, Zero};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{hex_elem, hex_elems, scalar_from_biguint, Codec, G1Element, G2Element, PairingContext, Scalar};
use crate::signatures::SignatureError;

#[derive(Clone)]
pub struct ClPairingKeypair {
    x: Scalar,
    y: Scalar,
    z: Vec<Scalar>,
    public: ClPairingPublic,
}

impl fmt::Debug for ClPairingKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClPairingKeypair")
            .field("slots", &self.public.slot_count())
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClPairingPublic {
    #[serde(with = "hex_elem")]
    pub x: G2Element,
    #[serde(with = "hex_elem")]
    pub y: G2Element,
    #[serde(with = "hex_elems")]
    pub z: Vec<G2Element>,
}

impl ClPairingPublic {
    pub fn slot_count(&self) -> usize {
        self.z.len() + 1
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.x.to_bytes();
        out.extend(self.y.to_bytes());
        for z in &self.z {
            out.extend(z.to_bytes());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClPairingSignature {
    #[serde(with = "hex_elem")]
    pub a: G1Element,
    #[serde(with = "hex_elems")]
    pub a_blocks: Vec<G1Element>,
    #[serde(with = "hex_elem")]
    pub b: G1Element,
    #[serde(with = "hex_elems")]
    pub b_blocks: Vec<G1Element>,
    #[serde(with = "hex_elem")]
    pub c: G1Element,
}

impl ClPairingSignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.a.to_bytes();
        for p in &self.a_blocks {
            out.extend(p.to_bytes());
        }
        out.extend(self.b.to_bytes());
        for p in &self.b_blocks {
            out.extend(p.to_bytes());
        }
        out.extend(self.c.to_bytes());
        out
    }

    /// `b` followed by every `B_i`: the points multiplied by the messages.
    pub fn message_bases(&self) -> Vec<G1Element> {
        std::iter::once(self.b).chain(self.b_blocks.iter().copied()).collect()
    }

    /// Multiplies every component by `factor`; validity is preserved.
    pub fn randomize(&self, factor: &Scalar) -> Self {
        ClPairingSignature {
            a: self.a * factor,
            a_blocks: self.a_blocks.iter().map(|p| *p * factor).collect(),
            b: self.b * factor,
            b_blocks: self.b_blocks.iter().map(|p| *p * factor).collect(),
            c: self.c * factor,
        }
    }
}

fn to_scalars(msgs: &[BigUint]) -> Vec<Scalar> {
    msgs.iter().map(scalar_from_biguint).collect()
}

impl ClPairingKeypair {
    pub fn generate<R: RngCore + CryptoRng>(slots: usize, rng: &mut R) -> Self {
        assert!(slots >= 1, "at least one attribute slot");
        let ctx = PairingContext::global();
        let x = ctx.random_nonzero_scalar(rng);
        let y = ctx.random_nonzero_scalar(rng);
        let z: Vec<Scalar> = (1..slots).map(|_| ctx.random_nonzero_scalar(rng)).collect();
        let public = ClPairingPublic {
            x: ctx.g2 * x,
            y: ctx.g2 * y,
            z: z.iter().map(|zi| ctx.g2 * zi).collect(),
        };
        ClPairingKeypair { x, y, z, public }
    }

    pub fn public(&self) -> &ClPairingPublic {
        &self.public
    }

    pub fn sign<R: RngCore + CryptoRng>(&self, msgs: &[BigUint], rng: &mut R) -> Result<ClPairingSignature, SignatureError> {
        let n = self.public.slot_count();
        if msgs.len() != n {
            return Err(SignatureError::SlotCount { expected: n, got: msgs.len() });
        }
        let ctx = PairingContext::global();
        let m = to_scalars(msgs);
        let k = ctx.random_nonzero_scalar(rng);
        let a = ctx.g1 * k;
        let a_blocks: Vec<G1Element> = self.z.iter().map(|zi| a * zi).collect();
        let b = a * self.y;
        let b_blocks: Vec<G1Element> = a_blocks.iter().map(|ai| *ai * self.y).collect();
        let mut exponent = Scalar::one() + self.y * m[0];
        for (zi, mi) in self.z.iter().zip(&m[1..]) {
            exponent += self.y * zi * mi;
        }
        let c = a * (self.x * exponent);
        Ok(ClPairingSignature { a, a_blocks, b, b_blocks, c })
    }
}

fn batch_weights(seed_parts: &[&[u8]], count: usize) -> Vec<Scalar> {
    let mut h = Sha256::new();
    h.update(b"HIDM/cl-batch");
    for p in seed_parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    let seed = h.finalize();
    (0..count)
        .map(|i| {
            let d = Sha256::new().chain_update(seed).chain_update((i as u32).to_be_bytes()).finalize();
            Scalar::from(u128::from_be_bytes(d[..16].try_into().expect("16 bytes")))
        })
        .collect()
}

/// Pairing terms whose product is the identity iff the structural
/// relations `A_i = z_i·a`, `b = y·a`, `B_i = y·A_i` hold (up to the
/// batching soundness error). The last `G1` term pairs with `g2`.
pub(crate) fn structure_terms(
    sig: &ClPairingSignature,
    public: &ClPairingPublic,
    weights: &[Scalar],
) -> (Vec<G1Element>, Vec<G2Element>, G1Element) {
    let n1 = public.z.len();
    let (w, v) = weights.split_at(n1);
    let mut z_combo = G2Element::zero();
    let mut g2_side = G1Element::zero();
    for ((zi, ai), wi) in public.z.iter().zip(&sig.a_blocks).zip(w) {
        z_combo += *zi * wi;
        g2_side += *ai * wi;
    }
    let mut y_side = sig.a * v[0];
    g2_side += sig.b * v[0];
    for ((ai, bi), vi) in sig.a_blocks.iter().zip(&sig.b_blocks).zip(&v[1..]) {
        y_side += *ai * vi;
        g2_side += *bi * vi;
    }
    (vec![sig.a, y_side], vec![z_combo, public.y], g2_side)
}

pub(crate) fn shape_ok(sig: &ClPairingSignature, public: &ClPairingPublic) -> bool {
    let n1 = public.z.len();
    sig.a_blocks.len() == n1 && sig.b_blocks.len() == n1 && !sig.a.is_zero() && !sig.c.is_zero()
}

/// Checks only the structural relations, with weights bound to `context`.
pub(crate) fn structure_holds(sig: &ClPairingSignature, public: &ClPairingPublic, context: &[u8]) -> bool {
    if !shape_ok(sig, public) {
        return false;
    }
    let ctx = PairingContext::global();
    let weights = batch_weights(&[context, &sig.to_bytes(), &public.to_bytes()], 2 * public.z.len() + 1);
    let (mut g1s, mut g2s, g2_side) = structure_terms(sig, public, &weights);
    g1s.push(-g2_side);
    g2s.push(ctx.g2);
    ctx.multi_pairing(&g1s, &g2s).is_zero()
}

pub fn verify(msgs: &[BigUint], sig: &ClPairingSignature, public: &ClPairingPublic) -> bool {
    if msgs.len() != public.slot_count() || !shape_ok(sig, public) {
        return false;
    }
    let ctx = PairingContext::global();
    let m = to_scalars(msgs);
    let mut msg_bytes = Vec::with_capacity(32 * m.len());
    for mi in &m {
        msg_bytes.extend(mi.to_bytes());
    }
    let weights = batch_weights(&[&msg_bytes, &sig.to_bytes(), &public.to_bytes()], 2 * public.z.len() + 2);
    let (main_weight, structural) = weights.split_last().expect("nonempty");
    let (mut g1s, mut g2s, mut g2_side) = structure_terms(sig, public, structural);
    let mut x_side = sig.a;
    for (bj, mj) in sig.message_bases().iter().zip(&m) {
        x_side += *bj * mj;
    }
    g1s.push(x_side * main_weight);
    g2s.push(public.x);
    g2_side += sig.c * main_weight;
    g1s.push(-g2_side);
    g2s.push(G2Element::generator());
    ctx.multi_pairing(&g1s, &g2s).is_zero()
}
