//! Pseudonym token: a PTA Schnorr signature over `PTI || pseudonym`,
//! issued only after the patient proves its credential (disclosing the
//! patient identifier) and that the pseudonym encodes that identifier.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::pcred::SLOT_PATIENT_ID;
use super::{schema, schema_tag, CredentialError};
use crate::algebra::{hex_bytes, G2Element, SchnorrGroup};
use crate::pre::{patient_id_hash, Pseudonym};
use crate::proofs::{pbp, pok, PbProof, PbpMode, PoKPCred};
use crate::signatures::{schnorr, ClPublicKey, SchnorrKeypair, SchnorrSig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudonymToken {
    #[serde(with = "schema")]
    pub schema: String,
    #[serde(with = "hex_bytes")]
    pub pti: [u8; 16],
    pub pseudonym: Pseudonym,
    pub sig: SchnorrSig,
}

pub fn signed_message(pti: &[u8; 16], pseudonym: &Pseudonym) -> Vec<u8> {
    let mut m = pti.to_vec();
    m.extend(pseudonym.to_bytes());
    m
}

pub fn pt_verify(group: &SchnorrGroup, pt: &PseudonymToken, pta_public: &num_bigint::BigUint) -> bool {
    schnorr::verify(group, &signed_message(&pt.pti, &pt.pseudonym), &pt.sig, pta_public)
}

/// Pseudonym ↔ patient identifier ↔ token id. Has no PII column.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PtaStore {
    records: Vec<PtaRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PtaRecord {
    #[serde(with = "hex_bytes")]
    pti: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pseudonym: Vec<u8>,
    #[serde(with = "hex_bytes")]
    patient_id: Vec<u8>,
}

impl PtaStore {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains_pseudonym(&self, pseudonym: &[u8]) -> bool {
        self.records.iter().any(|r| r.pseudonym == pseudonym)
    }

    pub(crate) fn patient_for(&self, pseudonym: &[u8]) -> Option<&[u8]> {
        self.records
            .iter()
            .find(|r| r.pseudonym == pseudonym)
            .map(|r| r.patient_id.as_slice())
    }
}

/// What the PTA checks and signs in one issuance.
pub struct PtRequest<'a> {
    pub pok: &'a PoKPCred,
    pub pok_context: &'a [u8],
    pub pseudonym: &'a Pseudonym,
    pub pk_patient: &'a G2Element,
    pub pbp: &'a PbProof,
}

/// Returns the token and the patient identifier taken from the proof.
pub fn pt_issue<R: RngCore + CryptoRng>(
    req: &PtRequest<'_>,
    apc_public: &ClPublicKey,
    mode: PbpMode,
    group: &SchnorrGroup,
    key: &SchnorrKeypair,
    store: &mut PtaStore,
    rng: &mut R,
) -> Result<(PseudonymToken, Vec<u8>), CredentialError> {
    let patient_id = req
        .pok
        .disclosed_value(SLOT_PATIENT_ID)
        .ok_or(CredentialError::CredentialProofRejected)?
        .to_vec();
    if !pok::verify(req.pok, apc_public, req.pok_context) {
        return Err(CredentialError::CredentialProofRejected);
    }
    let h = patient_id_hash(&patient_id);
    if !pbp::verify(req.pseudonym, req.pbp, req.pk_patient, &h, mode) {
        return Err(CredentialError::PseudonymBindingRejected);
    }
    let mut pti = [0u8; 16];
    rng.fill_bytes(&mut pti);
    let sig = schnorr::sign(group, key, &signed_message(&pti, req.pseudonym), rng);
    store.records.push(PtaRecord {
        pti: pti.to_vec(),
        pseudonym: req.pseudonym.to_bytes(),
        patient_id: patient_id.clone(),
    });
    let pt = PseudonymToken {
        schema: schema_tag(),
        pti,
        pseudonym: req.pseudonym.clone(),
        sig,
    };
    Ok((pt, patient_id))
}
