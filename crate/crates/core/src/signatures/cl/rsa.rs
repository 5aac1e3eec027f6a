//! Strong-RSA CL signatures (CL02, with Idemix-style parameter sizes).
//!
//! Public key `(n, S, Z, R_1..R_L)` over a safe-prime modulus, all bases in
//! the quadratic residues. A signature `(A, e, v)` satisfies
//! `Z ≡ A^e · S^v · ∏ R_i^{m_i} (mod n)` with `e` a prime drawn from
//! `[2^(le-1), 2^(le-1) + 2^(le'-1)]`.
//!
//! The signer knows the order `p'q'` of the residues and works with
//! discrete logarithms base `S` and CRT.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{hex_uint, hex_uints, params, tagged_digest};
use crate::signatures::SignatureError;

/// Modulus bits.
pub const LN: u64 = 3072;
/// Attribute bits.
pub const LM: u64 = 256;
/// Bit length of `e`.
pub const LE: u64 = 597;
/// Bit length of the interval `e` is drawn from.
pub const LE_PRIME: u64 = 120;
/// Bit length of `v`.
pub const LV: u64 = 3748;
/// Statistical zero-knowledge slack.
pub const LPHI: u64 = 80;
/// Challenge bits.
pub const LH: u64 = 256;

/// An RSA modulus `n = p·q` with `p = 2p' + 1`, `q = 2q' + 1`.
#[derive(Clone)]
pub struct SafeRsaModulus {
    p: BigUint,
    q: BigUint,
    p_half: BigUint,
    q_half: BigUint,
    n: BigUint,
}

impl fmt::Debug for SafeRsaModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SafeRsaModulus({} bits)", self.n.bits())
    }
}

impl SafeRsaModulus {
    pub fn from_safe_primes(p: BigUint, q: BigUint) -> Self {
        let p_half = (&p - 1u32) >> 1;
        let q_half = (&q - 1u32) >> 1;
        let n = &p * &q;
        SafeRsaModulus { p, q, p_half, q_half, n }
    }

    /// One of the embedded 3072-bit moduli (`index` 0 or 1).
    pub fn reference(index: usize) -> Self {
        let (p, q) = params::safe_primes(index);
        Self::from_safe_primes(p, q)
    }

    /// Generates fresh safe primes; slow at 1536 bits per factor.
    pub fn generate<R: RngCore + CryptoRng>(bits: usize, rng: &mut R) -> Self {
        let p = glass_pumpkin::safe_prime::from_rng(bits / 2, rng).expect("bit length supported");
        loop {
            let q = glass_pumpkin::safe_prime::from_rng(bits / 2, rng).expect("bit length supported");
            if q != p {
                return Self::from_safe_primes(p, q);
            }
        }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// Order `p'q'` of the quadratic residues.
    fn group_order(&self) -> BigUint {
        &self.p_half * &self.q_half
    }

    /// `base^exp mod n` for a residue `base`, via CRT with exponents reduced
    /// modulo `p'` and `q'`.
    fn residue_pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        let mp = (base % &self.p).modpow(&(exp % &self.p_half), &self.p);
        let mq = (base % &self.q).modpow(&(exp % &self.q_half), &self.q);
        // Garner: x = mq + q·((mp − mq)·q^-1 mod p).
        let q_inv = self.q.modinv(&self.p).expect("distinct primes");
        let diff = (&mp + &self.p - (&mq % &self.p)) % &self.p;
        &mq + &self.q * ((diff * q_inv) % &self.p)
    }
}

#[derive(Clone)]
pub struct ClRsaKeypair {
    modulus: SafeRsaModulus,
    log_z: BigUint,
    log_r: Vec<BigUint>,
    public: ClRsaPublic,
}

impl fmt::Debug for ClRsaKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClRsaKeypair")
            .field("modulus", &self.modulus)
            .field("slots", &self.public.slot_count())
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClRsaPublic {
    #[serde(with = "hex_uint")]
    pub n: BigUint,
    #[serde(with = "hex_uint")]
    pub s: BigUint,
    #[serde(with = "hex_uint")]
    pub z: BigUint,
    #[serde(with = "hex_uints")]
    pub r: Vec<BigUint>,
}

impl ClRsaPublic {
    pub fn slot_count(&self) -> usize {
        self.r.len()
    }

    fn width(&self) -> usize {
        (self.n.bits() as usize).div_ceil(8)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.width();
        let mut out = Vec::new();
        for v in [&self.n, &self.s, &self.z].into_iter().chain(&self.r) {
            out.extend(fixed_be(v, w));
        }
        out
    }
}

pub(crate) fn fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let bytes = v.to_bytes_be();
    let mut out = vec![0u8; width.saturating_sub(bytes.len())];
    out.extend(bytes);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClRsaSignature {
    #[serde(with = "hex_uint")]
    pub a: BigUint,
    #[serde(with = "hex_uint")]
    pub e: BigUint,
    #[serde(with = "hex_uint")]
    pub v: BigUint,
}

impl ClRsaSignature {
    /// Fixed-width `A || e || v`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = fixed_be(&self.a, (LN / 8) as usize);
        out.extend(fixed_be(&self.e, LE.div_ceil(8) as usize));
        out.extend(fixed_be(&self.v, LV.div_ceil(8) as usize));
        out
    }
}

fn random_below<R: RngCore + CryptoRng>(bound: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(bound)
}

/// A uniformly random quadratic residue that is not `1`.
fn random_residue<R: RngCore + CryptoRng>(n: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let h = random_below(n, rng);
        let s = h.modpow(&BigUint::from(2u8), n);
        if s > BigUint::one() && h.gcd(n).is_one() {
            return s;
        }
    }
}

fn prime_with<R: RngCore + CryptoRng>(candidate: &BigUint, rng: &mut R) -> bool {
    glass_pumpkin::prime::check_with(candidate, rng)
}

/// `[2^(le-1), 2^(le-1) + 2^(le'-1)]`.
pub fn e_interval() -> (BigUint, BigUint) {
    let lo = BigUint::one() << (LE - 1);
    let hi = &lo + (BigUint::one() << (LE_PRIME - 1));
    (lo, hi)
}

fn random_e<R: RngCore + CryptoRng>(rng: &mut R) -> BigUint {
    let (lo, _) = e_interval();
    loop {
        let offset = rng.gen_biguint(LE_PRIME - 1);
        let e = (&lo + offset) | BigUint::one();
        if prime_with(&e, rng) {
            return e;
        }
    }
}

impl ClRsaKeypair {
    pub fn generate<R: RngCore + CryptoRng>(modulus: SafeRsaModulus, slots: usize, rng: &mut R) -> Self {
        assert!(slots >= 1, "at least one attribute slot");
        let order = modulus.group_order();
        let n = modulus.n().clone();
        let s = random_residue(&n, rng);
        let mut log = || loop {
            let x = random_below(&order, rng);
            if x > BigUint::one() {
                return x;
            }
        };
        let log_z = log();
        let log_r: Vec<BigUint> = (0..slots).map(|_| log()).collect();
        let public = ClRsaPublic {
            z: modulus.residue_pow(&s, &log_z),
            r: log_r.iter().map(|x| modulus.residue_pow(&s, x)).collect(),
            n,
            s,
        };
        ClRsaKeypair { modulus, log_z, log_r, public }
    }

    pub fn public(&self) -> &ClRsaPublic {
        &self.public
    }

    pub fn sign<R: RngCore + CryptoRng>(&self, msgs: &[BigUint], rng: &mut R) -> Result<ClRsaSignature, SignatureError> {
        let slots = self.public.slot_count();
        if msgs.len() != slots {
            return Err(SignatureError::SlotCount { expected: slots, got: msgs.len() });
        }
        if msgs.iter().any(|m| m.bits() > LM) {
            return Err(SignatureError::AttributeTooLarge);
        }
        let order = self.modulus.group_order();
        let e = random_e(rng);
        let v = rng.gen_biguint(LV - 1) | (BigUint::one() << (LV - 1));
        // log_S(Q) = x_Z − v − Σ x_i m_i, and A = Q^(1/e).
        let mut sub = &v % &order;
        for (x, m) in self.log_r.iter().zip(msgs) {
            sub += x * m;
        }
        let log_q = (&self.log_z + &order - (sub % &order)) % &order;
        let e_inv = e.modinv(&order).expect("e is a prime larger than p' and q'");
        let a = self.modulus.residue_pow(&self.public.s, &((log_q * e_inv) % &order));
        Ok(ClRsaSignature { a, e, v })
    }
}

/// Deterministic primality check for the verifier.
fn e_is_prime(e: &BigUint) -> bool {
    let seed = tagged_digest(b"HIDM/cl-rsa-prime", &[&e.to_bytes_be()]);
    prime_with(e, &mut ChaCha20Rng::from_seed(seed))
}

pub fn verify(msgs: &[BigUint], sig: &ClRsaSignature, public: &ClRsaPublic) -> bool {
    let n = &public.n;
    if msgs.len() != public.slot_count() || msgs.iter().any(|m| m.bits() > LM) {
        return false;
    }
    let (lo, hi) = e_interval();
    if sig.e < lo || sig.e > hi || sig.v.bits() > LV || sig.a.is_zero() || &sig.a >= n {
        return false;
    }
    if !e_is_prime(&sig.e) {
        return false;
    }
    let mut rhs = sig.a.modpow(&sig.e, n) * public.s.modpow(&sig.v, n) % n;
    for (r, m) in public.r.iter().zip(msgs) {
        rhs = rhs * r.modpow(m, n) % n;
    }
    rhs == public.z
}
