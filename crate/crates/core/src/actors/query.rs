//! Authenticated audit queries. A patient proves a valid credential and
//! signs the query nonce with the key of every pseudonym it asks about;
//! the auditor authority presents its legitimacy credential and signs with
//! its DID key. Only then is a [`VerifiedAccess`] minted.

use std::collections::BTreeSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::episodes::proof_context;
use super::lvc::{self, LegitimacyCredential};
use super::world::World;
use super::{ActorError, Patient, Role};
use crate::algebra::{hex_bytes, tagged_digest};
use crate::credentials::CredentialError;
use crate::ledgers::{AuditFilter, AuditRecord, VerifiedAccess};
use crate::pre::Pseudonym;
use crate::proofs::{pok, PoKPCred};
use crate::signatures::{ibs, schnorr, IbsSignature, SchnorrSig};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OwnedPseudonym {
    pub pseudonym: Pseudonym,
    pub sig: IbsSignature,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatientAuditRequest {
    #[serde(with = "hex_bytes")]
    pub nonce: [u8; 16],
    pub pok: PoKPCred,
    pub pseudonyms: Vec<OwnedPseudonym>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuthorityAuditRequest {
    #[serde(with = "hex_bytes")]
    pub nonce: [u8; 16],
    pub lvc: LegitimacyCredential,
    pub filter: String,
    pub sig: SchnorrSig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub records: Vec<AuditRecord>,
}

pub fn ownership_message(nonce: &[u8; 16], pseudonym: &Pseudonym) -> Vec<u8> {
    tagged_digest(b"HIDM/audit-query", &[nonce, &pseudonym.to_bytes()]).to_vec()
}

fn authority_message(nonce: &[u8; 16], filter: &str) -> Vec<u8> {
    tagged_digest(b"HIDM/authority-query", &[nonce, filter.as_bytes()]).to_vec()
}

impl World {
    /// Fresh single-use query nonce.
    pub fn audit_nonce(&self, label: &str) -> [u8; 16] {
        let mut nonce = [0u8; 16];
        self.rng(&format!("audit-nonce/{label}")).fill_bytes(&mut nonce);
        self.audit_nonces.lock().expect("lock").insert(nonce);
        nonce
    }

    fn consume_nonce(&self, nonce: &[u8; 16]) -> Result<(), ActorError> {
        if self.audit_nonces.lock().expect("lock").remove(nonce) {
            Ok(())
        } else {
            Err(ActorError::State("unknown or reused query nonce"))
        }
    }

    /// Patient side: proves the credential and signs for every pseudonym
    /// it holds a key for.
    pub fn patient_audit_request(&self, p: &mut Patient, nonce: [u8; 16]) -> Result<PatientAuditRequest, ActorError> {
        let mut rng = self.rng(&p.next_scope("audit"));
        let cred = p.wallet.pcred.as_ref().ok_or(ActorError::State("patient holds no credential"))?;
        let context = proof_context("audit", &self.auditor.id.did, &nonce);
        let pok = pok::prove(&cred.slots(), &cred.sig, &self.apc_cl_public()?, &[], &context, &mut rng)
            .map_err(|_| ActorError::BadArtifact("credential does not verify under the issuer key"))?;
        let pseudonyms = p
            .wallet
            .pseudonym_keys
            .iter()
            .map(|(ps, sk)| OwnedPseudonym {
                pseudonym: ps.clone(),
                sig: ibs::sign(&ownership_message(&nonce, ps), sk, &mut rng),
            })
            .collect();
        Ok(PatientAuditRequest { nonce, pok, pseudonyms })
    }

    /// Patient-tier records for the pseudonyms whose ownership verifies.
    pub fn patient_audit_query(&self, req: &PatientAuditRequest, filter: &AuditFilter) -> Result<QueryResult, ActorError> {
        self.consume_nonce(&req.nonce)?;
        let context = proof_context("audit", &self.auditor.id.did, &req.nonce);
        if !pok::verify(&req.pok, &self.apc_cl_public()?, &context) {
            return Err(CredentialError::CredentialProofRejected.into());
        }
        let mpk = self.apc_ibs_public()?;
        let identifiers: BTreeSet<String> = req
            .pseudonyms
            .iter()
            .filter(|o| {
                ibs::verify(
                    &ownership_message(&req.nonce, &o.pseudonym),
                    &o.sig,
                    &o.pseudonym.to_bytes(),
                    &mpk,
                )
            })
            .map(|o| o.pseudonym.to_hex())
            .collect();
        let access = VerifiedAccess::patient(identifiers);
        Ok(QueryResult {
            records: self.audit.query(&access, filter),
        })
    }

    pub fn authority_audit_request(&self, nonce: [u8; 16], filter: &str) -> AuthorityAuditRequest {
        let mut rng = self.rng(&format!("authority-query/{}", hex::encode(nonce)));
        AuthorityAuditRequest {
            nonce,
            lvc: self.authority.lvc.clone(),
            filter: filter.to_string(),
            sig: self.authority.id.sign(&authority_message(&nonce, filter), &mut rng),
        }
    }

    pub fn authority_audit_query(&self, req: &AuthorityAuditRequest) -> Result<QueryResult, ActorError> {
        self.consume_nonce(&req.nonce)?;
        let did = req.lvc.subject_did.clone();
        let legit = lvc::verify(&req.lvc, Role::AuditorAuthority, &did, &self.dids, &self.gha.id.did);
        let signed = self
            .dids
            .resolve(&did)
            .active()
            .and_then(|d| d.authentication_key(self.group))
            .is_some_and(|y| schnorr::verify(self.group, &authority_message(&req.nonce, &req.filter), &req.sig, &y));
        if !(legit && signed) {
            return Err(ActorError::InsufficientAuthorization);
        }
        let filter = AuditFilter::parse(&req.filter)?;
        Ok(QueryResult {
            records: self.audit.query(&VerifiedAccess::authority(&did), &filter),
        })
    }
}
