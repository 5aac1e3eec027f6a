//! Hashing into prime fields and into `G1`.

use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::PrimeField;
use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::{G1Element, G1HashConfig, Scalar};

/// Bits of surplus output drawn before reduction; bounds the bias of the
/// reduced value by `2^-128`.
const SURPLUS_BITS: u64 = 128;

fn xof_bytes(tag: &[u8], input: &[u8], out_len: usize) -> Vec<u8> {
    assert!(!tag.is_empty(), "domain tag must be non-empty");
    assert!(tag.len() <= u16::MAX as usize);
    let mut xof = Shake256::default();
    xof.update(&(tag.len() as u16).to_be_bytes());
    xof.update(tag);
    xof.update(input);
    let mut out = vec![0u8; out_len];
    xof.finalize_xof().read(&mut out);
    out
}

/// Deterministic map of `(tag, input)` into `[0, modulus)`.
///
/// SHAKE256 over `len(tag) || tag || input`, squeezed to
/// `bits(modulus) + 128` bits and reduced.
pub fn hash_to_field(tag: &[u8], input: &[u8], modulus: &BigUint) -> BigUint {
    let out_len = (modulus.bits() + SURPLUS_BITS).div_ceil(8) as usize;
    BigUint::from_bytes_be(&xof_bytes(tag, input, out_len)) % modulus
}

/// [`hash_to_field`] specialised to the pairing scalar field.
pub fn hash_to_scalar(tag: &[u8], input: &[u8]) -> Scalar {
    let out_len = (u64::from(Scalar::MODULUS_BIT_SIZE) + SURPLUS_BITS).div_ceil(8) as usize;
    Scalar::from_be_bytes_mod_order(&xof_bytes(tag, input, out_len))
}

/// Hash onto the prime-order subgroup of `G1` (IETF hash-to-curve, SSWU +
/// isogeny, random-oracle variant). The tag becomes the DST.
pub fn hash_to_g1(tag: &[u8], input: &[u8]) -> G1Element {
    assert!(!tag.is_empty(), "domain tag must be non-empty");
    let hasher = MapToCurveBasedHasher::<
        G1Element,
        DefaultFieldHasher<Sha256, 128>,
        WBMap<G1HashConfig>,
    >::new(tag)
    .expect("BLS12-381 G1 map parameters are valid");
    hasher
        .hash(input)
        .expect("hash-to-curve on BLS12-381 G1 is total")
        .into()
}

/// SHA-256 over length-prefixed parts with a domain tag.
pub fn tagged_digest(tag: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    Digest::update(&mut h, (tag.len() as u32).to_be_bytes());
    Digest::update(&mut h, tag);
    for p in parts {
        Digest::update(&mut h, (p.len() as u64).to_be_bytes());
        Digest::update(&mut h, p);
    }
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{scalar_to_biguint, PairingContext};
    use ark_ec::PrimeGroup;
    use ark_ff::Zero;
    use std::collections::HashSet;

    #[test]
    fn deterministic_and_in_range() {
        let m = BigUint::from(1_000_003u64);
        let a = hash_to_field(b"T", b"x", &m);
        assert_eq!(a, hash_to_field(b"T", b"x", &m));
        assert!(a < m);
        assert_ne!(hash_to_field(b"T", b"x", &m), hash_to_field(b"U", b"x", &m));
    }

    #[test]
    fn scalar_variant_agrees_with_generic_route() {
        let r = PairingContext::global().order.clone();
        for i in 0..50u32 {
            let input = i.to_be_bytes();
            assert_eq!(
                scalar_to_biguint(&hash_to_scalar(b"HIDM/test", &input)),
                hash_to_field(b"HIDM/test", &input, &r)
            );
        }
    }

    #[test]
    fn no_collisions_over_ten_thousand_inputs() {
        let r = PairingContext::global().order.clone();
        let mut seen = HashSet::new();
        for i in 0..10_000u32 {
            assert!(seen.insert(hash_to_field(b"HIDM/collide", &i.to_le_bytes(), &r)));
        }
    }

    #[test]
    fn g1_hash_is_deterministic_in_subgroup() {
        let r = <Scalar as PrimeField>::MODULUS;
        for i in 0..1000u32 {
            let p = hash_to_g1(b"HIDM/test-g1", &i.to_be_bytes());
            assert!(!p.is_zero());
            assert!(p.mul_bigint(r).is_zero());
            let affine = ark_ec::CurveGroup::into_affine(p);
            assert!(affine.is_on_curve());
            assert!(affine.is_in_correct_subgroup_assuming_on_curve());
        }
        assert_eq!(hash_to_g1(b"A", b"in"), hash_to_g1(b"A", b"in"));
        assert_ne!(hash_to_g1(b"A", b"in"), hash_to_g1(b"B", b"in"));
    }

    #[test]
    fn tagged_digest_separates_parts() {
        assert_ne!(
            tagged_digest(b"t", &[b"ab", b"c"]),
            tagged_digest(b"t", &[b"a", b"bc"])
        );
    }
}
