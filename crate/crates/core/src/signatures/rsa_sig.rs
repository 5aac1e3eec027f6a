//! RSASSA-PKCS1-v1_5 with SHA-256 over 3072-bit moduli, used for
//! legitimacy credentials and as the plain-RSA issuance baseline.

use std::fmt;

use num_bigint::BigUint;
use rsa::{Pkcs1v15Sign, RsaPrivateKey, RsaPublicKey};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SignatureError;
use crate::algebra::{hex_bytes, hex_uint, params};

const PUBLIC_EXPONENT: u32 = 65537;

fn to_rsa_uint(v: &BigUint) -> rsa::BigUint {
    rsa::BigUint::from_bytes_be(&v.to_bytes_be())
}

fn from_rsa_uint(v: &rsa::BigUint) -> BigUint {
    BigUint::from_bytes_be(&v.to_bytes_be())
}

#[derive(Clone)]
pub struct RsaKeypair {
    secret: RsaPrivateKey,
    public: RsaPublic,
}

impl fmt::Debug for RsaKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RsaKeypair").field("public", &self.public).finish_non_exhaustive()
    }
}

/// Public key in a serializable form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaPublic {
    #[serde(with = "hex_uint")]
    pub n: BigUint,
    #[serde(with = "hex_uint")]
    pub e: BigUint,
}

impl RsaPublic {
    fn to_key(&self) -> Option<RsaPublicKey> {
        RsaPublicKey::new(to_rsa_uint(&self.n), to_rsa_uint(&self.e)).ok()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.n.to_bytes_be();
        let mut out = (n.len() as u32).to_be_bytes().to_vec();
        out.extend_from_slice(&n);
        out.extend_from_slice(&self.e.to_bytes_be());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename = "rsa-pkcs1-sha256")]
pub struct RsaSignature {
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

impl RsaKeypair {
    pub fn from_primes(p: &BigUint, q: &BigUint) -> Result<Self, SignatureError> {
        let secret = RsaPrivateKey::from_p_q(to_rsa_uint(p), to_rsa_uint(q), rsa::BigUint::from(PUBLIC_EXPONENT))
            .map_err(|e| SignatureError::Rsa(e.to_string()))?;
        let public = {
            use rsa::traits::PublicKeyParts;
            RsaPublic {
                n: from_rsa_uint(secret.n()),
                e: from_rsa_uint(secret.e()),
            }
        };
        Ok(RsaKeypair { secret, public })
    }

    /// One of the embedded simulation keys (`index` 0 or 1).
    pub fn reference(index: usize) -> Self {
        let (p, q) = params::rsa_primes(index);
        Self::from_primes(&p, &q).expect("embedded primes form a valid key")
    }

    pub fn public(&self) -> &RsaPublic {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> RsaSignature {
        let digest = Sha256::digest(msg);
        let bytes = self
            .secret
            .sign(Pkcs1v15Sign::new::<Sha256>(), &digest)
            .expect("digest fits the modulus");
        RsaSignature { bytes }
    }
}

pub fn verify(msg: &[u8], sig: &RsaSignature, public: &RsaPublic) -> bool {
    let Some(key) = public.to_key() else {
        return false;
    };
    let digest = Sha256::digest(msg);
    key.verify(Pkcs1v15Sign::new::<Sha256>(), &digest, &sig.bytes).is_ok()
}
