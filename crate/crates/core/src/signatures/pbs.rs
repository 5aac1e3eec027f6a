//! Partially blind Schnorr signatures (Abe–Okamoto style).
//!
//! The user hides the message (an appointment token id) from the signer,
//! while the common info (an expiry timestamp) is agreed in the clear and
//! folded into the challenge:
//!
//! ```text
//! signer                         user
//!   R = g^r          ───R──▶      commit = H(msg || t)
//!                                 R' = R · g^α · Y^β
//!                                 cu' = H(R' || commit)
//!                    ◀──cu──      cu = cu' + β
//!   cs = H(Y || info)
//!   c' = cu + cs
//!   s' = r + c'·x    ──s'──▶      check g^s' = R · Y^c'
//!                                 s = s' + α,  c = cu' + cs
//! ```
//!
//! Verification: `c == H(g^s · Y^-c || H(msg || t)) + H(Y || info) mod q`.
//! It holds because `g^s · Y^-c = g^(r + c'x + α) · Y^-(cu' + cs)
//! = R · g^α · Y^(c' - cu' - cs) = R · g^α · Y^β = R'`.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::schnorr::SchnorrKeypair;
use super::{SignatureError, PBS_TAG};
use crate::algebra::{hash_to_field, hex_bytes, hex_uint, SchnorrGroup};

const COMMIT_TAG: &[u8] = b"HIDM/pbs-commit";
const INFO_TAG: &[u8] = b"HIDM/pbs-info";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename = "pbs-schnorr")]
pub struct PartiallyBlindSig {
    #[serde(with = "hex_uint")]
    pub c: BigUint,
    #[serde(with = "hex_uint")]
    pub s: BigUint,
    /// Commitment nonce for the hidden message.
    #[serde(with = "hex_bytes")]
    pub t: [u8; 32],
}

/// Everything the signer sees during one issuance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignerTranscript {
    #[serde(with = "hex_uint")]
    pub commitment: BigUint,
    #[serde(with = "hex_uint")]
    pub blinded_challenge: BigUint,
    #[serde(with = "hex_bytes")]
    pub info: Vec<u8>,
    #[serde(with = "hex_uint")]
    pub response: BigUint,
}

/// `H(msg || t)`, the hidden-message commitment.
pub fn message_commitment(msg: &[u8], t: &[u8; 32]) -> [u8; 32] {
    crate::algebra::tagged_digest(COMMIT_TAG, &[msg, t])
}

/// `H(Y || info) mod q`.
pub fn info_challenge(group: &SchnorrGroup, public: &BigUint, info: &[u8]) -> BigUint {
    let mut input = group.encode(public);
    input.extend_from_slice(info);
    hash_to_field(INFO_TAG, &input, group.q())
}

fn blind_challenge(group: &SchnorrGroup, blinded_commitment: &BigUint, commit: &[u8; 32]) -> BigUint {
    let mut input = group.encode(blinded_commitment);
    input.extend_from_slice(commit);
    hash_to_field(PBS_TAG, &input, group.q())
}

/// Signer state between sending `R` and receiving the blinded challenge.
pub struct PbsSignerSession<'a> {
    group: &'a SchnorrGroup,
    key: &'a SchnorrKeypair,
    nonce: BigUint,
    commitment: BigUint,
    info: Vec<u8>,
}

impl<'a> PbsSignerSession<'a> {
    pub fn start<R: RngCore + CryptoRng>(
        group: &'a SchnorrGroup,
        key: &'a SchnorrKeypair,
        info: &[u8],
        rng: &mut R,
    ) -> Self {
        let nonce = group.random_exponent(rng);
        Self::start_with_nonce(group, key, info, nonce)
    }

    /// Starts with a caller-chosen nonce; intended for test vectors.
    pub fn start_with_nonce(group: &'a SchnorrGroup, key: &'a SchnorrKeypair, info: &[u8], nonce: BigUint) -> Self {
        let commitment = group.exp_g(&nonce);
        PbsSignerSession {
            group,
            key,
            nonce,
            commitment,
            info: info.to_vec(),
        }
    }

    pub fn commitment(&self) -> &BigUint {
        &self.commitment
    }

    /// Consumes the session so a nonce can answer only one challenge.
    pub fn respond(self, blinded_challenge: &BigUint) -> (BigUint, SignerTranscript) {
        let q = self.group.q();
        let cs = info_challenge(self.group, self.key.public(), &self.info);
        let c_prime = (blinded_challenge % q + cs) % q;
        let response = (&self.nonce + c_prime * self.key.secret()) % q;
        let transcript = SignerTranscript {
            commitment: self.commitment,
            blinded_challenge: blinded_challenge.clone(),
            info: self.info,
            response: response.clone(),
        };
        (response, transcript)
    }
}

/// User-side blinding factors.
#[derive(Clone, Debug)]
pub struct PbsBlinding {
    pub alpha: BigUint,
    pub beta: BigUint,
    pub t: [u8; 32],
}

impl PbsBlinding {
    pub fn random<R: RngCore + CryptoRng>(group: &SchnorrGroup, rng: &mut R) -> Self {
        let mut t = [0u8; 32];
        rng.fill_bytes(&mut t);
        PbsBlinding {
            alpha: group.random_exponent(rng),
            beta: group.random_exponent(rng),
            t,
        }
    }
}

/// User state between sending the blinded challenge and unblinding.
pub struct PbsUserSession<'a> {
    group: &'a SchnorrGroup,
    public: BigUint,
    info: Vec<u8>,
    signer_commitment: BigUint,
    blinding: PbsBlinding,
    unblinded_challenge: BigUint,
}

impl<'a> PbsUserSession<'a> {
    pub fn blind<R: RngCore + CryptoRng>(
        group: &'a SchnorrGroup,
        public: &BigUint,
        info: &[u8],
        msg: &[u8],
        signer_commitment: &BigUint,
        rng: &mut R,
    ) -> Result<(Self, BigUint), SignatureError> {
        let blinding = PbsBlinding::random(group, rng);
        Self::blind_with(group, public, info, msg, signer_commitment, blinding)
    }

    /// Returns the session and the blinded challenge `cu` to send.
    pub fn blind_with(
        group: &'a SchnorrGroup,
        public: &BigUint,
        info: &[u8],
        msg: &[u8],
        signer_commitment: &BigUint,
        blinding: PbsBlinding,
    ) -> Result<(Self, BigUint), SignatureError> {
        if !group.contains(signer_commitment) || !group.contains(public) {
            return Err(SignatureError::BadCommitment);
        }
        let commit = message_commitment(msg, &blinding.t);
        let blinded_commitment = group.mul(
            &group.mul(signer_commitment, &group.exp_g(&blinding.alpha)),
            &group.exp(public, &blinding.beta),
        );
        let unblinded_challenge = blind_challenge(group, &blinded_commitment, &commit);
        let cu = (&unblinded_challenge + &blinding.beta) % group.q();
        let session = PbsUserSession {
            group,
            public: public.clone(),
            info: info.to_vec(),
            signer_commitment: signer_commitment.clone(),
            blinding,
            unblinded_challenge,
        };
        Ok((session, cu))
    }

    pub fn finish(self, blinded_challenge: &BigUint, response: &BigUint) -> Result<PartiallyBlindSig, SignatureError> {
        let g = self.group;
        let q = g.q();
        let cs = info_challenge(g, &self.public, &self.info);
        let c_prime = (blinded_challenge + &cs) % q;
        if response >= q || g.exp_g(response) != g.mul(&self.signer_commitment, &g.exp(&self.public, &c_prime)) {
            return Err(SignatureError::BadResponse);
        }
        Ok(PartiallyBlindSig {
            c: (&self.unblinded_challenge + cs) % q,
            s: (response + &self.blinding.alpha) % q,
            t: self.blinding.t,
        })
    }
}

/// Runs the whole four-message flow locally.
pub fn pbs_issue<R1, R2>(
    group: &SchnorrGroup,
    signer: &SchnorrKeypair,
    info: &[u8],
    msg: &[u8],
    user_rng: &mut R1,
    signer_rng: &mut R2,
) -> Result<(PartiallyBlindSig, SignerTranscript), SignatureError>
where
    R1: RngCore + CryptoRng,
    R2: RngCore + CryptoRng,
{
    let session = PbsSignerSession::start(group, signer, info, signer_rng);
    let (user, cu) = PbsUserSession::blind(group, signer.public(), info, msg, session.commitment(), user_rng)?;
    let (response, transcript) = session.respond(&cu);
    let sig = user.finish(&cu, &response)?;
    Ok((sig, transcript))
}

pub fn verify(group: &SchnorrGroup, msg: &[u8], info: &[u8], sig: &PartiallyBlindSig, public: &BigUint) -> bool {
    let q = group.q();
    if &sig.c >= q || &sig.s >= q || !group.contains(public) {
        return false;
    }
    let commit = message_commitment(msg, &sig.t);
    let cs = info_challenge(group, public, info);
    let r_hat = group.mul(&group.exp_g(&sig.s), &group.exp_neg(public, &sig.c));
    (blind_challenge(group, &r_hat, &commit) + cs) % q == sig.c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::seeded_rng;

    fn n(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn honest_issue_verifies() {
        let grp = SchnorrGroup::standard();
        let mut rng = seeded_rng(21);
        let key = SchnorrKeypair::generate(grp, &mut rng);
        let ati = [7u8; 16];
        let exp = 1_700_000_000i64.to_be_bytes();
        let (sig, tr) = pbs_issue(grp, &key, &exp, &ati, &mut seeded_rng(1), &mut seeded_rng(2)).unwrap();
        assert!(verify(grp, &ati, &exp, &sig, key.public()));
        let later = 1_700_000_001i64.to_be_bytes();
        assert!(!verify(grp, &ati, &later, &sig, key.public()));
        assert!(!verify(grp, &[8u8; 16], &exp, &sig, key.public()));
        // Transcript fields never coincide with final signature values.
        assert_ne!(tr.blinded_challenge, sig.c);
        assert_ne!(tr.response, sig.s);
        let json = serde_json::to_string(&tr).unwrap();
        assert!(!json.contains(&hex::encode(ati)));
        assert!(!json.contains(&hex::encode(message_commitment(&ati, &sig.t))));
    }

    #[test]
    fn small_group_unblinding_identity() {
        // p = 23, q = 11, g = 2, x = 3, Y = 8; signer nonce r = 5 so R = 9.
        // With α = 4 and β = 2: R' = 9 · 2^4 · 8^2 = 9 · 16 · 18 = 2592 ≡ 16 (mod 23).
        let grp = SchnorrGroup::new(n(23), n(11), n(2)).unwrap();
        let key = SchnorrKeypair::from_secret(&grp, n(3)).unwrap();
        let blinding = PbsBlinding {
            alpha: n(4),
            beta: n(2),
            t: [1u8; 32],
        };
        let signer = PbsSignerSession::start_with_nonce(&grp, &key, b"exp", n(5));
        assert_eq!(signer.commitment(), &n(9));
        let (user, cu) = PbsUserSession::blind_with(&grp, key.public(), b"exp", b"ati", &n(9), blinding).unwrap();
        let (s_prime, _) = signer.respond(&cu);
        let sig = user.finish(&cu, &s_prime).unwrap();
        let cs = info_challenge(&grp, key.public(), b"exp");
        let c_prime = (&cu + &cs) % 11u32;
        assert_eq!(s_prime, (n(5) + &c_prime * 3u32) % 11u32);
        assert_eq!(sig.s, (&s_prime + 4u32) % 11u32);
        let r_hat = grp.mul(&grp.exp_g(&sig.s), &grp.exp_neg(key.public(), &sig.c));
        assert_eq!(r_hat, n(16));
        assert!(verify(&grp, b"ati", b"exp", &sig, key.public()));
    }

    #[test]
    fn user_aborts_on_foreign_commitment() {
        let grp = SchnorrGroup::new(n(23), n(11), n(2)).unwrap();
        let key = SchnorrKeypair::from_secret(&grp, n(3)).unwrap();
        let mut rng = seeded_rng(3);
        // 22 = -1 mod 23 is not in the order-11 subgroup.
        let res = PbsUserSession::blind(&grp, key.public(), b"e", b"m", &n(22), &mut rng);
        assert!(matches!(res, Err(SignatureError::BadCommitment)));
    }

    #[test]
    fn user_rejects_bad_response() {
        let grp = SchnorrGroup::standard();
        let mut rng = seeded_rng(4);
        let key = SchnorrKeypair::generate(grp, &mut rng);
        let signer = PbsSignerSession::start(grp, &key, b"e", &mut rng);
        let (user, cu) = PbsUserSession::blind(grp, key.public(), b"e", b"m", signer.commitment(), &mut rng).unwrap();
        let (resp, _) = signer.respond(&cu);
        let res = user.finish(&cu, &((resp + 1u32) % grp.q()));
        assert_eq!(res, Err(SignatureError::BadResponse));
    }
}
