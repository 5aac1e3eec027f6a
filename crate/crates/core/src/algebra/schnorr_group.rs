use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::params;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("q does not divide p - 1")]
    OrderMismatch,
    #[error("generator does not have order q")]
    BadGenerator,
}

/// Prime-order subgroup of `Z_p*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchnorrGroup {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    element_len: usize,
}

impl SchnorrGroup {
    /// Checks `q | p - 1`, `g != 1` and `g^q = 1`. Primality of `p` and `q`
    /// is the caller's responsibility.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        if q.is_zero() || !(&p - 1u32).is_multiple_of(&q) {
            return Err(GroupError::OrderMismatch);
        }
        if g <= BigUint::one() || g >= p || !g.modpow(&q, &p).is_one() {
            return Err(GroupError::BadGenerator);
        }
        let element_len = p.bits().div_ceil(8) as usize;
        Ok(SchnorrGroup {
            p,
            q,
            g,
            element_len,
        })
    }

    /// The 3072-bit / 256-bit group used by every Schnorr-family scheme.
    pub fn standard() -> &'static SchnorrGroup {
        static GROUP: OnceLock<SchnorrGroup> = OnceLock::new();
        GROUP.get_or_init(|| {
            let (p, q, g) = params::schnorr_group();
            SchnorrGroup::new(p, q, g).expect("built-in group parameters are consistent")
        })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// Width in bytes of an encoded group element.
    pub fn element_len(&self) -> usize {
        self.element_len
    }

    pub fn exp(&self, base: &BigUint, e: &BigUint) -> BigUint {
        base.modpow(e, &self.p)
    }

    pub fn exp_g(&self, e: &BigUint) -> BigUint {
        self.g.modpow(e, &self.p)
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    /// `y^-e` for a subgroup element `y`, computed as `y^(q - e mod q)`.
    pub fn exp_neg(&self, y: &BigUint, e: &BigUint) -> BigUint {
        let e = e % &self.q;
        if e.is_zero() {
            return BigUint::one();
        }
        y.modpow(&(&self.q - e), &self.p)
    }

    /// Membership in the order-`q` subgroup.
    pub fn contains(&self, y: &BigUint) -> bool {
        !y.is_zero() && y < &self.p && y.modpow(&self.q, &self.p).is_one()
    }

    /// Uniform exponent in `[1, q)`.
    pub fn random_exponent<R: RngCore + CryptoRng>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_range(&BigUint::one(), &self.q)
    }

    /// Fixed-width big-endian encoding (`element_len` bytes).
    pub fn encode(&self, y: &BigUint) -> Vec<u8> {
        let raw = y.to_bytes_be();
        let mut out = vec![0u8; self.element_len.saturating_sub(raw.len())];
        out.extend_from_slice(&raw);
        out
    }

    pub fn decode(&self, bytes: &[u8]) -> Option<BigUint> {
        if bytes.len() != self.element_len {
            return None;
        }
        let y = BigUint::from_bytes_be(bytes);
        self.contains(&y).then_some(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::seeded_rng;

    #[test]
    fn standard_group_sizes() {
        let grp = SchnorrGroup::standard();
        assert_eq!(grp.p().bits(), 3072);
        assert_eq!(grp.q().bits(), 256);
        assert!(grp.exp_g(grp.q()).is_one());
        assert!(!grp.g().is_one());
        assert_eq!(grp.element_len(), 384);
    }

    #[test]
    fn toy_group_validation() {
        let n = |v: u32| BigUint::from(v);
        assert!(SchnorrGroup::new(n(23), n(11), n(2)).is_ok());
        assert_eq!(
            SchnorrGroup::new(n(23), n(7), n(2)),
            Err(GroupError::OrderMismatch)
        );
        // 5 generates all of Z_23*, so its order is 22, not 11
        assert_eq!(
            SchnorrGroup::new(n(23), n(11), n(5)),
            Err(GroupError::BadGenerator)
        );
    }

    #[test]
    fn exp_neg_inverts() {
        let grp = SchnorrGroup::standard();
        let mut rng = seeded_rng(4);
        let e = grp.random_exponent(&mut rng);
        let y = grp.exp_g(&e);
        let c = grp.random_exponent(&mut rng);
        assert!(grp.mul(&grp.exp(&y, &c), &grp.exp_neg(&y, &c)).is_one());
    }

    #[test]
    fn encode_decode() {
        let grp = SchnorrGroup::standard();
        let y = grp.exp_g(&BigUint::from(5u8));
        let enc = grp.encode(&y);
        assert_eq!(enc.len(), 384);
        assert_eq!(grp.decode(&enc), Some(y));
        assert_eq!(grp.decode(&[0u8; 384]), None);
        // -1 has order 2, outside the odd-order subgroup
        assert_eq!(grp.decode(&grp.encode(&p_minus_one())), None);
    }

    fn p_minus_one() -> BigUint {
        SchnorrGroup::standard().p() - 1u32
    }
}
