//! Group abstractions, hashing into fields and groups, and canonical
//! encodings shared by every scheme in the crate.
//!
//! The pairing setting is the type-3 (asymmetric) BLS12-381 curve: `G1` and
//! `G2` are distinct prime-order subgroups, `GT` is the order-`r` subgroup of
//! `Fq12*`. Switching curves means changing the type aliases below; nothing
//! else names the curve.
//!
//! The second setting is a classic Schnorr group: the order-`q` subgroup of
//! `Z_p*` with a 3072-bit `p` and 256-bit `q`.

mod codec;
mod hash;
pub mod params;
mod rng;
mod schnorr_group;

use std::sync::OnceLock;

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};

pub use codec::{hex_bytes, hex_elem, hex_elems, hex_uint, hex_uints, Codec, CodecError};
pub use hash::{hash_to_field, hash_to_g1, hash_to_scalar, tagged_digest};
pub use rng::{derive_rng, rng_from_env, seeded_rng, HidmRng, SEED_ENV_VAR};
pub use schnorr_group::{GroupError, SchnorrGroup};

/// The pairing-friendly curve used by the whole build.
pub type Curve = ark_bls12_381::Bls12_381;
/// Curve parameters used to hash into `G1`.
pub(crate) type G1HashConfig = ark_bls12_381::g1::Config;

pub type Scalar = ark_bls12_381::Fr;
pub type G1Element = ark_ec::short_weierstrass::Projective<ark_bls12_381::g1::Config>;
pub type G2Element = ark_ec::short_weierstrass::Projective<ark_bls12_381::g2::Config>;
pub type GtElement = PairingOutput<Curve>;

pub const CURVE_ID: &str = "BLS12-381";

/// Public parameters of the bilinear setting.
#[derive(Clone, Debug)]
pub struct PairingContext {
    pub curve_id: &'static str,
    pub order: BigUint,
    pub g1: G1Element,
    pub g2: G2Element,
    /// `z = e(g1, g2)`.
    pub z: GtElement,
}

impl PairingContext {
    fn new() -> Self {
        let g1 = G1Element::generator();
        let g2 = G2Element::generator();
        let z = Curve::pairing(g1, g2);
        PairingContext {
            curve_id: CURVE_ID,
            order: Scalar::MODULUS.into(),
            g1,
            g2,
            z,
        }
    }

    /// The process-wide context (the pairing `z` is computed once).
    pub fn global() -> &'static PairingContext {
        static CTX: OnceLock<PairingContext> = OnceLock::new();
        CTX.get_or_init(PairingContext::new)
    }

    pub fn pairing(&self, a: &G1Element, b: &G2Element) -> GtElement {
        Curve::pairing(*a, *b)
    }

    /// Product of pairings `prod e(a_i, b_i)` sharing one final exponentiation.
    pub fn multi_pairing(&self, a: &[G1Element], b: &[G2Element]) -> GtElement {
        let a: Vec<_> = G1Element::normalize_batch(a);
        let b: Vec<_> = G2Element::normalize_batch(b);
        Curve::multi_pairing(a, b)
    }

    /// `z^e`.
    pub fn z_pow(&self, e: &Scalar) -> GtElement {
        self.z * e
    }

    pub fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar::rand(rng)
    }

    pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        loop {
            let s = Scalar::rand(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }
}

pub fn scalar_to_biguint(s: &Scalar) -> BigUint {
    BigUint::from_bytes_be(&s.into_bigint().to_bytes_be())
}

/// Reduces `n` modulo the group order.
pub fn scalar_from_biguint(n: &BigUint) -> Scalar {
    Scalar::from_be_bytes_mod_order(&n.to_bytes_be())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::{Field, One};

    #[test]
    fn generators_have_order_r() {
        let ctx = PairingContext::global();
        let r = Scalar::MODULUS;
        assert!(ctx.g1.mul_bigint(r).is_zero());
        assert!(ctx.g2.mul_bigint(r).is_zero());
        assert!(!ctx.g1.is_zero());
        assert!(!ctx.g2.is_zero());
        assert_ne!(ctx.z, GtElement::zero());
        assert!(ctx.z.0.pow(r).is_one());
        assert_eq!(ctx.order.bits(), 255);
    }

    #[test]
    fn bilinearity_spot_check() {
        let ctx = PairingContext::global();
        let mut rng = seeded_rng(7);
        for _ in 0..100 {
            let a = ctx.random_scalar(&mut rng);
            let b = ctx.random_scalar(&mut rng);
            let lhs = ctx.pairing(&(ctx.g1 * a), &(ctx.g2 * b));
            assert_eq!(lhs, ctx.z_pow(&(a * b)));
        }
    }

    #[test]
    fn multi_pairing_matches_product() {
        let ctx = PairingContext::global();
        let mut rng = seeded_rng(8);
        let a: Vec<_> = (0..3).map(|_| ctx.g1 * ctx.random_scalar(&mut rng)).collect();
        let b: Vec<_> = (0..3).map(|_| ctx.g2 * ctx.random_scalar(&mut rng)).collect();
        let prod = a
            .iter()
            .zip(&b)
            .fold(GtElement::zero(), |acc, (x, y)| acc + ctx.pairing(x, y));
        assert_eq!(ctx.multi_pairing(&a, &b), prod);
    }

    #[test]
    fn biguint_scalar_conversion() {
        let mut rng = seeded_rng(9);
        for _ in 0..50 {
            let s = Scalar::rand(&mut rng);
            assert_eq!(scalar_from_biguint(&scalar_to_biguint(&s)), s);
        }
    }
}
