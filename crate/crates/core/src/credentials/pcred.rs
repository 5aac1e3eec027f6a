//! Patient credential: six CL-signed attribute slots, and the APC store
//! that maps identity evidence to the minted patient identifier.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{schema, schema_tag, BioHash, CredentialError};
use crate::algebra::{hex_bytes, tagged_digest};
use crate::clock::Timestamp;
use crate::signatures::cl;
use crate::signatures::{ClKeypair, ClPublicKey, ClSignature};

pub const SLOT_CREDENTIAL_ID: usize = 0;
pub const SLOT_DID_PATIENT: usize = 1;
pub const SLOT_PATIENT_ID: usize = 2;
pub const SLOT_ISSUE_DATE: usize = 3;
pub const SLOT_BIOHASH: usize = 4;
pub const SLOT_DID_APC: usize = 5;
pub const SLOT_COUNT: usize = 6;

pub const PATIENT_ID_LEN: usize = 16;

/// Personally identifying information presented at enrolment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiBundle {
    pub full_name: String,
    pub date_of_birth: String,
    pub national_id: String,
    pub address: String,
}

impl PiiBundle {
    /// Simulated identity proofing: required fields present, date as
    /// `YYYY-MM-DD`.
    pub fn passes_proofing(&self) -> bool {
        let dob = self.date_of_birth.as_bytes();
        let date_ok = dob.len() == 10
            && dob
                .iter()
                .enumerate()
                .all(|(i, b)| if i == 4 || i == 7 { *b == b'-' } else { b.is_ascii_digit() });
        date_ok && !self.full_name.trim().is_empty() && !self.national_id.trim().is_empty()
    }

    /// Identity key for duplicate enrolment detection.
    pub fn fingerprint(&self) -> [u8; 32] {
        tagged_digest(
            b"HIDM/pii",
            &[
                self.national_id.trim().as_bytes(),
                self.date_of_birth.as_bytes(),
                self.full_name.trim().to_lowercase().as_bytes(),
            ],
        )
    }

    /// Every byte-string a store scan should look for.
    pub fn scan_strings(&self) -> Vec<&str> {
        vec![&self.full_name, &self.national_id, &self.address]
    }
}

/// PII ↔ patient identifier. Has no pseudonym column.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ApcStore {
    pii_by_patient: BTreeMap<String, PiiBundle>,
    patient_by_fingerprint: BTreeMap<String, String>,
}

impl ApcStore {
    /// Returns the patient identifier and whether it already existed.
    pub fn enroll<R: RngCore + CryptoRng>(&mut self, pii: &PiiBundle, rng: &mut R) -> (Vec<u8>, bool) {
        let fp = hex::encode(pii.fingerprint());
        if let Some(existing) = self.patient_by_fingerprint.get(&fp) {
            return (hex::decode(existing).expect("stored as hex"), true);
        }
        let mut id = [0u8; PATIENT_ID_LEN];
        loop {
            rng.fill_bytes(&mut id);
            if !self.pii_by_patient.contains_key(&hex::encode(id)) {
                break;
            }
        }
        let key = hex::encode(id);
        self.pii_by_patient.insert(key.clone(), pii.clone());
        self.patient_by_fingerprint.insert(fp, key);
        (id.to_vec(), false)
    }

    pub fn len(&self) -> usize {
        self.pii_by_patient.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pii_by_patient.is_empty()
    }

    pub(crate) fn pii_for(&self, patient_id: &[u8]) -> Option<&PiiBundle> {
        self.pii_by_patient.get(&hex::encode(patient_id))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientCredential {
    #[serde(with = "schema")]
    pub schema: String,
    #[serde(with = "hex_bytes")]
    pub credential_id: [u8; 16],
    pub did_patient_l: String,
    #[serde(with = "hex_bytes")]
    pub patient_id: Vec<u8>,
    pub issue_date: Timestamp,
    #[serde(with = "hex_bytes")]
    pub biohash: BioHash,
    pub did_apc: String,
    pub sig: ClSignature,
}

impl PatientCredential {
    /// The signed attributes in slot order.
    pub fn slots(&self) -> Vec<Vec<u8>> {
        slot_values(
            &self.credential_id,
            &self.did_patient_l,
            &self.patient_id,
            self.issue_date,
            &self.biohash,
            &self.did_apc,
        )
    }
}

fn slot_values(
    credential_id: &[u8; 16],
    did_patient: &str,
    patient_id: &[u8],
    issue_date: Timestamp,
    biohash: &BioHash,
    did_apc: &str,
) -> Vec<Vec<u8>> {
    vec![
        credential_id.to_vec(),
        did_patient.as_bytes().to_vec(),
        patient_id.to_vec(),
        issue_date.to_be_bytes().to_vec(),
        biohash.to_vec(),
        did_apc.as_bytes().to_vec(),
    ]
}

/// Enrols the patient (reusing the identifier on re-enrolment) and signs a
/// fresh credential.
#[allow(clippy::too_many_arguments)]
pub fn pcred_issue<R: RngCore + CryptoRng>(
    pii: &PiiBundle,
    did_patient: &str,
    biohash: &BioHash,
    did_apc: &str,
    key: &ClKeypair,
    store: &mut ApcStore,
    now: Timestamp,
    rng: &mut R,
) -> Result<PatientCredential, CredentialError> {
    if !pii.passes_proofing() {
        return Err(CredentialError::IdentityProofingFailed);
    }
    let (patient_id, _) = store.enroll(pii, rng);
    let mut credential_id = [0u8; 16];
    rng.fill_bytes(&mut credential_id);
    let attrs = slot_values(&credential_id, did_patient, &patient_id, now, biohash, did_apc);
    let sig = key.sign(&attrs, rng)?;
    Ok(PatientCredential {
        schema: schema_tag(),
        credential_id,
        did_patient_l: did_patient.to_string(),
        patient_id,
        issue_date: now,
        biohash: *biohash,
        did_apc: did_apc.to_string(),
        sig,
    })
}

pub fn pcred_verify(cred: &PatientCredential, issuer: &ClPublicKey) -> bool {
    cl::verify(&cred.slots(), &cred.sig, issuer)
}

/// Parses and verifies; any schema violation is a rejection.
pub fn pcred_verify_json(json: &str, issuer: &ClPublicKey) -> bool {
    serde_json::from_str::<PatientCredential>(json)
        .map(|c| pcred_verify(&c, issuer))
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::seeded_rng;
    use crate::signatures::ClVariant;

    pub(crate) fn sample_pii() -> PiiBundle {
        PiiBundle {
            full_name: "Ada Example".into(),
            date_of_birth: "1990-04-12".into(),
            national_id: "NID-000123".into(),
            address: "1 Sample Street".into(),
        }
    }

    #[test]
    fn issue_reenrol_and_round_trip() {
        let mut rng = seeded_rng(101);
        let key = ClKeypair::generate(ClVariant::Pairing, SLOT_COUNT, &mut rng);
        let mut store = ApcStore::default();
        let pii = sample_pii();
        let bh = [5u8; 32];
        let a = pcred_issue(&pii, "did:hidm:p1", &bh, "did:hidm:apc", &key, &mut store, Timestamp(10), &mut rng).unwrap();
        let b = pcred_issue(&pii, "did:hidm:p1", &bh, "did:hidm:apc", &key, &mut store, Timestamp(20), &mut rng).unwrap();
        assert_eq!(a.patient_id, b.patient_id);
        assert_ne!(a.credential_id, b.credential_id);
        assert_eq!(store.len(), 1);
        let pk = key.public();
        assert!(pcred_verify(&a, &pk));
        let json = serde_json::to_string(&a).unwrap();
        assert!(pcred_verify_json(&json, &pk));
        let mut swapped = a.clone();
        std::mem::swap(&mut swapped.did_patient_l, &mut swapped.did_apc);
        assert!(!pcred_verify(&swapped, &pk));
    }

    #[test]
    fn proofing_failure_and_schema_fuzz() {
        let mut rng = seeded_rng(102);
        let key = ClKeypair::generate(ClVariant::Pairing, SLOT_COUNT, &mut rng);
        let mut store = ApcStore::default();
        let bad = PiiBundle {
            date_of_birth: "12/04/1990".into(),
            ..sample_pii()
        };
        assert_eq!(
            pcred_issue(&bad, "d", &[0; 32], "a", &key, &mut store, Timestamp(0), &mut rng),
            Err(CredentialError::IdentityProofingFailed)
        );
        let cred = pcred_issue(&sample_pii(), "d", &[0; 32], "a", &key, &mut store, Timestamp(0), &mut rng).unwrap();
        let mut v: serde_json::Value = serde_json::to_value(&cred).unwrap();
        v.as_object_mut().unwrap().remove("biohash");
        assert!(!pcred_verify_json(&v.to_string(), &key.public()));
        let mut v: serde_json::Value = serde_json::to_value(&cred).unwrap();
        v["schema"] = "hidm/v0".into();
        assert!(!pcred_verify_json(&v.to_string(), &key.public()));
    }
}
