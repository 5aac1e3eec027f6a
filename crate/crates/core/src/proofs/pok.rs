//! Proof of possession of a CL signature with selective disclosure.
//!
//! The Fiat–Shamir challenge covers a caller-chosen context (episode tag,
//! verifier DID, verifier nonce), the issuer key, the randomized signature
//! and the disclosed attributes, so a proof is useless outside the session
//! it was made for.
//!
//! Pairing variant: the signature is re-randomized by `r'`, and `c` is
//! replaced by `ĉ = r·r'·c` so it hides nothing the verifier could link.
//! The prover shows knowledge of the hidden `m_j` and `ρ = 1/r` with
//! `e(ã + Σ m_j·b̃_j, X) = ρ·e(ĉ, g2)` (GT written additively).
//!
//! RSA variant: `A' = A·S^rA` and a proof of `(e', v', m_j)` with
//! `Z / (A'^(2^(le-1)) ∏_D R_j^m_j) = A'^e' · S^v' · ∏_H R_j^m_j`, plus
//! interval checks on the responses.

use std::collections::BTreeSet;

use ark_ff::{Field, Zero};
use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::ProofError;
use crate::algebra::{
    hash_to_scalar, hex_bytes, hex_elem, hex_elems, hex_uint, scalar_from_biguint, tagged_digest, Codec, G1Element,
    PairingContext, Scalar,
};
use crate::signatures::cl::pairing::{structure_holds, ClPairingPublic, ClPairingSignature};
use crate::signatures::cl::rsa::{fixed_be, ClRsaPublic, ClRsaSignature, LE, LE_PRIME, LH, LM, LN, LPHI, LV};
use crate::signatures::cl::{encode_attribute, encode_attributes, verify_encoded};
use crate::signatures::{ClPublicKey, ClSignature, CL_POK_TAG};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosedAttribute {
    pub slot: usize,
    #[serde(with = "hex_bytes")]
    pub value: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoKPCred {
    pub disclosed: Vec<DisclosedAttribute>,
    pub body: PokBody,
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme")]
pub enum PokBody {
    #[serde(rename = "cl-pairing-pok")]
    Pairing(PairingPok),
    #[serde(rename = "cl-rsa-pok")]
    Rsa(RsaPok),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingPok {
    /// Randomized signature; its `c` field carries `ĉ`.
    pub randomized: ClPairingSignature,
    #[serde(with = "hex_elem")]
    pub challenge: Scalar,
    #[serde(with = "hex_elems")]
    pub hidden_responses: Vec<Scalar>,
    #[serde(with = "hex_elem")]
    pub rho_response: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaPok {
    #[serde(with = "hex_uint")]
    pub a_prime: BigUint,
    #[serde(with = "hex_uint")]
    pub challenge: BigUint,
    #[serde(with = "hex_int")]
    pub e_response: BigInt,
    #[serde(with = "hex_int")]
    pub v_response: BigInt,
    #[serde(with = "hex_ints")]
    pub hidden_responses: Vec<BigInt>,
}

/// Signed integers as hex with an optional leading `-`.
mod hex_int {
    use num_bigint::{BigInt, Sign};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::algebra::hex_uint;

    pub fn encode(v: &BigInt) -> String {
        let mag = hex_uint::encode(v.magnitude());
        if v.sign() == Sign::Minus {
            format!("-{mag}")
        } else {
            mag
        }
    }

    pub fn decode(s: &str) -> Result<BigInt, String> {
        let (neg, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let mag = hex_uint::decode(digits).map_err(|e| e.to_string())?;
        if neg && mag.bits() == 0 {
            return Err("negative zero".into());
        }
        Ok(BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, mag))
    }

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        decode(&String::deserialize(d)?).map_err(D::Error::custom)
    }
}

mod hex_ints {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(super::hex_int::encode))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| super::hex_int::decode(s).map_err(D::Error::custom))
            .collect()
    }
}

fn disclosure_bytes(disclosed: &[DisclosedAttribute]) -> Vec<u8> {
    let mut out = Vec::new();
    for d in disclosed {
        out.extend((d.slot as u32).to_be_bytes());
        out.extend((d.value.len() as u32).to_be_bytes());
        out.extend(&d.value);
    }
    out
}

/// Checks slots are in range, strictly increasing; returns hidden slots.
fn hidden_slots(disclosed: &[DisclosedAttribute], slots: usize) -> Option<Vec<usize>> {
    let mut prev = None;
    for d in disclosed {
        if d.slot >= slots || prev.is_some_and(|p| d.slot <= p) {
            return None;
        }
        prev = Some(d.slot);
    }
    let shown: BTreeSet<usize> = disclosed.iter().map(|d| d.slot).collect();
    Some((0..slots).filter(|i| !shown.contains(i)).collect())
}

pub fn prove<A: AsRef<[u8]>, R: RngCore + CryptoRng>(
    attrs: &[A],
    sig: &ClSignature,
    public: &ClPublicKey,
    disclose: &[usize],
    context: &[u8],
    rng: &mut R,
) -> Result<PoKPCred, ProofError> {
    let msgs = encode_attributes(attrs);
    if !verify_encoded(&msgs, sig, public) {
        return Err(ProofError::InvalidCredential);
    }
    let shown: BTreeSet<usize> = disclose.iter().copied().collect();
    if let Some(&bad) = shown.iter().find(|&&s| s >= attrs.len()) {
        return Err(ProofError::BadDisclosure(bad));
    }
    let disclosed: Vec<DisclosedAttribute> = shown
        .iter()
        .map(|&slot| DisclosedAttribute {
            slot,
            value: attrs[slot].as_ref().to_vec(),
        })
        .collect();
    let hidden: Vec<usize> = (0..attrs.len()).filter(|i| !shown.contains(i)).collect();
    let body = match (sig, public) {
        (ClSignature::Pairing(s), ClPublicKey::Pairing(pk)) => {
            PokBody::Pairing(prove_pairing(&msgs, s, pk, &disclosed, &hidden, context, rng))
        }
        (ClSignature::Rsa(s), ClPublicKey::Rsa(pk)) => {
            PokBody::Rsa(prove_rsa(&msgs, s, pk, &disclosed, &hidden, context, rng))
        }
        _ => return Err(ProofError::InvalidCredential),
    };
    Ok(PoKPCred { disclosed, body })
}

pub fn verify(proof: &PoKPCred, public: &ClPublicKey, context: &[u8]) -> bool {
    let Some(hidden) = hidden_slots(&proof.disclosed, public.slot_count()) else {
        return false;
    };
    match (&proof.body, public) {
        (PokBody::Pairing(body), ClPublicKey::Pairing(pk)) => verify_pairing(body, pk, &proof.disclosed, &hidden, context),
        (PokBody::Rsa(body), ClPublicKey::Rsa(pk)) => verify_rsa(body, pk, &proof.disclosed, &hidden, context),
        _ => false,
    }
}

impl PoKPCred {
    pub fn disclosed_value(&self, slot: usize) -> Option<&[u8]> {
        self.disclosed.iter().find(|d| d.slot == slot).map(|d| d.value.as_slice())
    }
}

fn pairing_challenge(
    context: &[u8],
    pk: &ClPairingPublic,
    randomized: &ClPairingSignature,
    disclosed: &[DisclosedAttribute],
    commitment: &crate::algebra::GtElement,
) -> Scalar {
    let mut input = Vec::new();
    for part in [
        context.to_vec(),
        pk.to_bytes(),
        randomized.to_bytes(),
        disclosure_bytes(disclosed),
        commitment.to_bytes(),
    ] {
        input.extend((part.len() as u64).to_be_bytes());
        input.extend(part);
    }
    hash_to_scalar(CL_POK_TAG, &input)
}

fn prove_pairing<R: RngCore + CryptoRng>(
    msgs: &[BigUint],
    sig: &ClPairingSignature,
    pk: &ClPairingPublic,
    disclosed: &[DisclosedAttribute],
    hidden: &[usize],
    context: &[u8],
    rng: &mut R,
) -> PairingPok {
    let ctx = PairingContext::global();
    let m: Vec<Scalar> = msgs.iter().map(scalar_from_biguint).collect();
    let r_prime = ctx.random_nonzero_scalar(rng);
    let r = ctx.random_nonzero_scalar(rng);
    let mut randomized = sig.randomize(&r_prime);
    randomized.c *= r;
    let rho = r.inverse().expect("nonzero");
    let bases = randomized.message_bases();

    let k: Vec<Scalar> = hidden.iter().map(|_| ctx.random_scalar(rng)).collect();
    let k_rho = ctx.random_scalar(rng);
    let mut x_side = G1Element::zero();
    for (j, kj) in hidden.iter().zip(&k) {
        x_side += bases[*j] * kj;
    }
    let commitment = ctx.multi_pairing(&[x_side, -(randomized.c * k_rho)], &[pk.x, ctx.g2]);
    let challenge = pairing_challenge(context, pk, &randomized, disclosed, &commitment);
    let hidden_responses = hidden.iter().zip(&k).map(|(j, kj)| *kj + challenge * m[*j]).collect();
    PairingPok {
        randomized,
        challenge,
        hidden_responses,
        rho_response: k_rho + challenge * rho,
    }
}

fn verify_pairing(
    body: &PairingPok,
    pk: &ClPairingPublic,
    disclosed: &[DisclosedAttribute],
    hidden: &[usize],
    context: &[u8],
) -> bool {
    if body.hidden_responses.len() != hidden.len() {
        return false;
    }
    let sig = &body.randomized;
    let mut weight_context = context.to_vec();
    weight_context.extend(body.challenge.to_bytes());
    if !structure_holds(sig, pk, &weight_context) {
        return false;
    }
    let ctx = PairingContext::global();
    let bases = sig.message_bases();
    let mut public_part = sig.a;
    for d in disclosed {
        let m = scalar_from_biguint(&encode_attribute(d.slot, &d.value));
        public_part += bases[d.slot] * m;
    }
    let mut x_side = public_part * body.challenge;
    for (j, sj) in hidden.iter().zip(&body.hidden_responses) {
        x_side += bases[*j] * sj;
    }
    let commitment = ctx.multi_pairing(&[x_side, -(sig.c * body.rho_response)], &[pk.x, ctx.g2]);
    pairing_challenge(context, pk, sig, disclosed, &commitment) == body.challenge
}

/// `base^exp mod n` for signed exponents; `None` if `base` is not a unit.
fn pow_signed(base: &BigUint, exp: &BigInt, n: &BigUint) -> Option<BigUint> {
    let b = if exp.sign() == Sign::Minus { base.modinv(n)? } else { base.clone() };
    Some(b.modpow(exp.magnitude(), n))
}

fn rsa_challenge(
    context: &[u8],
    pk: &ClRsaPublic,
    a_prime: &BigUint,
    disclosed: &[DisclosedAttribute],
    commitment: &BigUint,
) -> BigUint {
    let w = (LN / 8) as usize;
    let digest = tagged_digest(
        CL_POK_TAG,
        &[
            context,
            &pk.to_bytes(),
            &fixed_be(a_prime, w),
            &disclosure_bytes(disclosed),
            &fixed_be(commitment, w),
        ],
    );
    BigUint::from_bytes_be(&digest)
}

fn random_bits<R: RngCore + CryptoRng>(bits: u64, rng: &mut R) -> BigInt {
    BigInt::from_biguint(Sign::Plus, rng.gen_biguint(bits))
}

fn prove_rsa<R: RngCore + CryptoRng>(
    msgs: &[BigUint],
    sig: &ClRsaSignature,
    pk: &ClRsaPublic,
    disclosed: &[DisclosedAttribute],
    hidden: &[usize],
    context: &[u8],
    rng: &mut R,
) -> RsaPok {
    let n = &pk.n;
    let r_a = rng.gen_biguint(LN + LPHI);
    let a_prime = &sig.a * pk.s.modpow(&r_a, n) % n;
    let v_prime = BigInt::from(sig.v.clone()) - BigInt::from(&sig.e * &r_a);
    let e_prime = BigInt::from(&sig.e - (BigUint::one() << (LE - 1)));

    let r_e = random_bits(LE_PRIME + LPHI + LH, rng);
    let r_v = random_bits(LV + LPHI + LH, rng);
    let r_m: Vec<BigInt> = hidden.iter().map(|_| random_bits(LM + LPHI + LH, rng)).collect();
    let mut commitment = a_prime.modpow(r_e.magnitude(), n) * pk.s.modpow(r_v.magnitude(), n) % n;
    for (j, rj) in hidden.iter().zip(&r_m) {
        commitment = commitment * pk.r[*j].modpow(rj.magnitude(), n) % n;
    }
    let challenge = rsa_challenge(context, pk, &a_prime, disclosed, &commitment);
    let c = BigInt::from(challenge.clone());
    RsaPok {
        a_prime,
        e_response: &r_e + &c * e_prime,
        v_response: &r_v + &c * v_prime,
        hidden_responses: hidden
            .iter()
            .zip(&r_m)
            .map(|(j, rj)| rj + &c * BigInt::from(msgs[*j].clone()))
            .collect(),
        challenge,
    }
}

fn verify_rsa(body: &RsaPok, pk: &ClRsaPublic, disclosed: &[DisclosedAttribute], hidden: &[usize], context: &[u8]) -> bool {
    let n = &pk.n;
    if body.hidden_responses.len() != hidden.len()
        || body.challenge.bits() > LH
        || body.a_prime.bits() == 0
        || &body.a_prime >= n
        || !body.a_prime.gcd(n).is_one()
    {
        return false;
    }
    let in_range = |v: &BigInt, bits: u64| v.is_positive() && v.bits() <= bits + 1;
    if !in_range(&body.e_response, LE_PRIME + LPHI + LH)
        || body.v_response.bits() > LV + LPHI + LH + 2
        || !body.hidden_responses.iter().all(|m| in_range(m, LM + LPHI + LH))
    {
        return false;
    }
    let Some(z_inv) = pk.z.modinv(n) else {
        return false;
    };
    // (A'^(2^(le-1)) · ∏_D R^m / Z)^c
    let mut base = body.a_prime.modpow(&(BigUint::one() << (LE - 1)), n) * z_inv % n;
    for d in disclosed {
        base = base * pk.r[d.slot].modpow(&encode_attribute(d.slot, &d.value), n) % n;
    }
    let mut t = base.modpow(&body.challenge, n);
    t = t * body.a_prime.modpow(body.e_response.magnitude(), n) % n;
    let Some(sv) = pow_signed(&pk.s, &body.v_response, n) else {
        return false;
    };
    t = t * sv % n;
    for (j, mj) in hidden.iter().zip(&body.hidden_responses) {
        t = t * pk.r[*j].modpow(mj.magnitude(), n) % n;
    }
    rsa_challenge(context, pk, &body.a_prime, disclosed, &t) == body.challenge
}
