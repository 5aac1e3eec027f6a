//! Legitimacy credentials: the health authority's RSA signature binding a
//! DID to an organizational role and an access scope.

use serde::{Deserialize, Serialize};

use super::Role;
use crate::clock::Timestamp;
use crate::credentials::{schema, schema_tag};
use crate::ledgers::{DidLedger, KeyPurpose};
use crate::signatures::rsa_sig::{self, RsaKeypair, RsaPublic, RsaSignature};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegitimacyCredential {
    #[serde(with = "schema")]
    pub schema: String,
    pub subject_did: String,
    pub role: Role,
    pub scope: Vec<String>,
    pub issuer_did: String,
    pub issued_at: Timestamp,
    pub sig: RsaSignature,
}

#[derive(Serialize)]
struct Unsigned<'a> {
    subject_did: &'a str,
    role: Role,
    scope: &'a [String],
    issuer_did: &'a str,
    issued_at: Timestamp,
}

impl LegitimacyCredential {
    pub fn signing_bytes(&self) -> Vec<u8> {
        signing_bytes(&self.subject_did, self.role, &self.scope, &self.issuer_did, self.issued_at)
    }

    pub fn allows(&self, action: &str) -> bool {
        self.scope.iter().any(|s| s == action)
    }
}

fn signing_bytes(subject: &str, role: Role, scope: &[String], issuer: &str, at: Timestamp) -> Vec<u8> {
    let mut m = b"HIDM/lvc".to_vec();
    let body = Unsigned {
        subject_did: subject,
        role,
        scope,
        issuer_did: issuer,
        issued_at: at,
    };
    m.extend(serde_json::to_vec(&body).expect("serializes"));
    m
}

pub fn issue(
    key: &RsaKeypair,
    issuer_did: &str,
    subject_did: &str,
    role: Role,
    scope: &[&str],
    now: Timestamp,
) -> LegitimacyCredential {
    let scope: Vec<String> = scope.iter().map(|s| s.to_string()).collect();
    let sig = key.sign(&signing_bytes(subject_did, role, &scope, issuer_did, now));
    LegitimacyCredential {
        schema: schema_tag(),
        subject_did: subject_did.to_string(),
        role,
        scope,
        issuer_did: issuer_did.to_string(),
        issued_at: now,
        sig,
    }
}

/// RSA key a DID document publishes for assertions.
pub fn rsa_key(dids: &DidLedger, did: &str) -> Option<RsaPublic> {
    let doc = dids.resolve(did).active()?;
    serde_json::from_slice(doc.key(KeyPurpose::RsaAssertion)?).ok()
}

/// True iff `lvc` names `presenter` in `expected` role, is signed by the
/// governance DID, and neither DID is revoked.
pub fn verify(lvc: &LegitimacyCredential, expected: Role, presenter: &str, dids: &DidLedger, governance: &str) -> bool {
    if lvc.role != expected || lvc.subject_did != presenter || lvc.issuer_did != governance {
        return false;
    }
    if dids.resolve(presenter).active().is_none() {
        return false;
    }
    rsa_key(dids, governance).is_some_and(|pk| rsa_sig::verify(&lvc.signing_bytes(), &lvc.sig, &pk))
}
