//! Appointment token: a patient-chosen UUIDv4 (hidden from the APC) and an
//! APC-chosen expiry, bound by one partially blind Schnorr signature.

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{schema, schema_tag, CredentialError};
use crate::algebra::{hex_bytes, SchnorrGroup};
use crate::clock::Timestamp;
use crate::proofs::{pok, PoKPCred};
use crate::signatures::pbs::{self, PbsSignerSession, PbsUserSession, SignerTranscript};
use crate::signatures::{ClPublicKey, PartiallyBlindSig, SchnorrKeypair};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppointmentToken {
    #[serde(with = "schema")]
    pub schema: String,
    #[serde(with = "hex_bytes")]
    pub ati: [u8; 16],
    pub exp: Timestamp,
    pub sig: PartiallyBlindSig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtPolicy {
    pub validity_secs: i64,
    pub clock_skew_secs: i64,
}

impl Default for AtPolicy {
    fn default() -> Self {
        AtPolicy {
            validity_secs: 24 * 3600,
            clock_skew_secs: 120,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtStatus {
    Valid,
    Expired,
    BadSignature,
}

/// The common info signed in the clear.
pub fn exp_info(exp: Timestamp) -> [u8; 8] {
    exp.to_be_bytes()
}

/// A random version-4 UUID.
pub fn fresh_ati<R: RngCore + CryptoRng>(rng: &mut R) -> [u8; 16] {
    let mut bytes = [0u8; 16];
    rng.fill_bytes(&mut bytes);
    *uuid::Builder::from_random_bytes(bytes).into_uuid().as_bytes()
}

pub fn at_verify_sig(group: &SchnorrGroup, at: &AppointmentToken, apc_public: &BigUint) -> bool {
    pbs::verify(group, &at.ati, &exp_info(at.exp), &at.sig, apc_public)
}

/// Valid iff the signature verifies and `now <= exp + skew`.
pub fn at_check(group: &SchnorrGroup, at: &AppointmentToken, now: Timestamp, apc_public: &BigUint, policy: &AtPolicy) -> AtStatus {
    if !at_verify_sig(group, at, apc_public) {
        AtStatus::BadSignature
    } else if now > at.exp.plus_secs(policy.clock_skew_secs) {
        AtStatus::Expired
    } else {
        AtStatus::Valid
    }
}

/// APC side: verifies the credential proof before any signing round.
#[allow(clippy::too_many_arguments)]
pub fn at_signer_start<'a, R: RngCore + CryptoRng>(
    pok_proof: &PoKPCred,
    pok_context: &[u8],
    apc_cl_public: &ClPublicKey,
    group: &'a SchnorrGroup,
    key: &'a SchnorrKeypair,
    now: Timestamp,
    policy: &AtPolicy,
    rng: &mut R,
) -> Result<(PbsSignerSession<'a>, Timestamp), CredentialError> {
    if !pok::verify(pok_proof, apc_cl_public, pok_context) {
        return Err(CredentialError::CredentialProofRejected);
    }
    let exp = now.plus_secs(policy.validity_secs);
    Ok((PbsSignerSession::start(group, key, &exp_info(exp), rng), exp))
}

/// Patient side: picks the ATI and blinds it against the signer commitment.
pub fn at_user_blind<'a, R: RngCore + CryptoRng>(
    group: &'a SchnorrGroup,
    apc_public: &BigUint,
    exp: Timestamp,
    signer_commitment: &BigUint,
    rng: &mut R,
) -> Result<(PbsUserSession<'a>, [u8; 16], BigUint), CredentialError> {
    let ati = fresh_ati(rng);
    let (session, cu) = PbsUserSession::blind(group, apc_public, &exp_info(exp), &ati, signer_commitment, rng)?;
    Ok((session, ati, cu))
}

pub fn at_user_finish(
    session: PbsUserSession<'_>,
    ati: [u8; 16],
    exp: Timestamp,
    cu: &BigUint,
    response: &BigUint,
) -> Result<AppointmentToken, CredentialError> {
    let sig = session.finish(cu, response)?;
    Ok(AppointmentToken {
        schema: schema_tag(),
        ati,
        exp,
        sig,
    })
}

/// Both sides of issuance run locally; returns the token and what the APC saw.
#[allow(clippy::too_many_arguments)]
pub fn at_issue<R1, R2>(
    pok_proof: &PoKPCred,
    pok_context: &[u8],
    apc_cl_public: &ClPublicKey,
    group: &SchnorrGroup,
    key: &SchnorrKeypair,
    now: Timestamp,
    policy: &AtPolicy,
    user_rng: &mut R1,
    signer_rng: &mut R2,
) -> Result<(AppointmentToken, SignerTranscript), CredentialError>
where
    R1: RngCore + CryptoRng,
    R2: RngCore + CryptoRng,
{
    let (signer, exp) = at_signer_start(pok_proof, pok_context, apc_cl_public, group, key, now, policy, signer_rng)?;
    let (user, ati, cu) = at_user_blind(group, key.public(), exp, signer.commitment(), user_rng)?;
    let (response, transcript) = signer.respond(&cu);
    Ok((at_user_finish(user, ati, exp, &cu, &response)?, transcript))
}
