//! Warrant-gated re-identification. Each holder of one half of the
//! pseudonym → identifier → PII mapping discloses only on a warrant that
//! verifies under the auditor authority's key, and every disclosure is
//! logged by the auditor.

use serde::{Deserialize, Serialize};

use super::lvc;
use super::world::World;
use super::{ActorError, Role};
use crate::algebra::hex_bytes;
use crate::clock::Timestamp;
use crate::credentials::{schema, schema_tag, PiiBundle};
use crate::ledgers::{AccessLevel, AuditRecord, EventType, OriginModule};
use crate::signatures::rsa_sig::{self, RsaSignature};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Warrant {
    #[serde(with = "schema")]
    pub schema: String,
    #[serde(with = "hex_bytes")]
    pub warrant_id: [u8; 16],
    /// Hex of the pseudonym to resolve.
    pub target: String,
    pub reason: String,
    pub issuer_did: String,
    pub issued_at: Timestamp,
    pub sig: RsaSignature,
}

#[derive(Serialize)]
struct Unsigned<'a> {
    warrant_id: String,
    target: &'a str,
    reason: &'a str,
    issuer_did: &'a str,
    issued_at: Timestamp,
}

impl Warrant {
    pub fn signing_bytes(&self) -> Vec<u8> {
        let body = Unsigned {
            warrant_id: hex::encode(self.warrant_id),
            target: &self.target,
            reason: &self.reason,
            issuer_did: &self.issuer_did,
            issued_at: self.issued_at,
        };
        let mut m = b"HIDM/warrant".to_vec();
        m.extend(serde_json::to_vec(&body).expect("serializes"));
        m
    }
}

/// A warrant whose signature and issuer legitimacy have been checked.
/// Only [`World::verify_warrant`] constructs one.
#[derive(Clone, Debug)]
pub struct VerifiedWarrant {
    warrant: Warrant,
}

impl VerifiedWarrant {
    pub fn warrant(&self) -> &Warrant {
        &self.warrant
    }
}

/// The identifier the PTA released under a warrant; the APC accepts
/// nothing else.
#[derive(Clone, Debug)]
pub struct PtaDisclosure {
    warrant_id: [u8; 16],
    patient_id: Vec<u8>,
}

impl PtaDisclosure {
    pub fn patient_id(&self) -> &[u8] {
        &self.patient_id
    }
}

impl World {
    /// The auditor authority signs a warrant for `target` (pseudonym hex).
    pub fn issue_warrant(&self, target: &str, reason: &str) -> Warrant {
        use rand::RngCore;
        let mut rng = self.rng(&format!("warrant/{target}/{reason}"));
        let mut warrant_id = [0u8; 16];
        rng.fill_bytes(&mut warrant_id);
        let mut w = Warrant {
            schema: schema_tag(),
            warrant_id,
            target: target.to_string(),
            reason: reason.to_string(),
            issuer_did: self.authority.id.did.clone(),
            issued_at: self.now(),
            sig: RsaSignature { bytes: vec![] },
        };
        w.sig = self.authority.rsa.sign(&w.signing_bytes());
        w
    }

    pub fn verify_warrant(&self, w: &Warrant) -> Result<VerifiedWarrant, ActorError> {
        let issuer_ok = lvc::verify(&self.authority.lvc, Role::AuditorAuthority, &w.issuer_did, &self.dids, &self.gha.id.did);
        let sig_ok = lvc::rsa_key(&self.dids, &w.issuer_did).is_some_and(|pk| rsa_sig::verify(&w.signing_bytes(), &w.sig, &pk));
        if issuer_ok && sig_ok {
            Ok(VerifiedWarrant { warrant: w.clone() })
        } else {
            Err(ActorError::TraceRefused)
        }
    }

    /// PTA: pseudonym → patient identifier.
    pub fn pta_reveal(&self, w: &VerifiedWarrant) -> Result<PtaDisclosure, ActorError> {
        let target = hex::decode(&w.warrant.target).map_err(|_| ActorError::TraceRefused)?;
        let patient_id = self
            .pta
            .store
            .lock()
            .expect("lock")
            .patient_for(&target)
            .map(<[u8]>::to_vec)
            .ok_or(ActorError::TraceRefused)?;
        Ok(PtaDisclosure {
            warrant_id: w.warrant.warrant_id,
            patient_id,
        })
    }

    /// APC: patient identifier → PII.
    pub fn apc_reveal(&self, w: &VerifiedWarrant, disclosure: &PtaDisclosure) -> Result<PiiBundle, ActorError> {
        if disclosure.warrant_id != w.warrant.warrant_id {
            return Err(ActorError::TraceRefused);
        }
        self.apc
            .store
            .lock()
            .expect("lock")
            .pii_for(&disclosure.patient_id)
            .cloned()
            .ok_or(ActorError::TraceRefused)
    }

    /// Resolves the warrant's pseudonym to PII, logging both disclosures.
    pub fn trace_identity(&self, w: &Warrant) -> Result<PiiBundle, ActorError> {
        let verified = self.verify_warrant(w)?;
        let id = hex::encode(w.warrant_id);
        let mut rng = self.rng(&format!("trace/{id}"));
        let disclosure = self.pta_reveal(&verified)?;
        let record = |subject: String, holder: &str| {
            AuditRecord::draft(
                self.now(),
                OriginModule::Auditor,
                EventType::TraceDisclosure,
                AccessLevel::AuditorAuthorityAccessible,
                subject,
            )
            .detail("warrantId", id.clone())
            .detail("disclosedBy", holder)
        };
        self.log(&self.auditor.id, record(w.target.clone(), "PTA"), &mut rng)?;
        let pii = self.apc_reveal(&verified, &disclosure)?;
        self.log(&self.auditor.id, record(hex::encode(disclosure.patient_id()), "APC"), &mut rng)?;
        Ok(pii)
    }
}
