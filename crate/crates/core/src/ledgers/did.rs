//! DID document ledger. A document is registered with a Schnorr signature
//! by one of its own keys; an update must be signed by a key of the
//! version it replaces and carry the next version number. A governance
//! DID (the health authority) can flag documents as revoked.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{HashChain, LedgerError};
use crate::algebra::{hex_bytes, SchnorrGroup};
use crate::signatures::{schnorr, SchnorrSig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KeyPurpose {
    /// Schnorr key proving control of the DID and authenticating channels.
    Authentication,
    /// Schnorr key signing tokens or audit entries.
    AssertionMethod,
    /// RSA key signing legitimacy credentials and warrants.
    RsaAssertion,
    /// CL issuer public key (JSON).
    CredentialIssuance,
    /// IBS master public key.
    IbsMaster,
    /// Record repository re-encryption target key.
    PreTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DidKey {
    pub id: String,
    pub purpose: KeyPurpose,
    #[serde(with = "hex_bytes")]
    pub material: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct DidDocument {
    pub did: String,
    pub public_keys: Vec<DidKey>,
    pub service_endpoints: Vec<String>,
    pub version: u64,
}

impl DidDocument {
    pub fn key(&self, purpose: KeyPurpose) -> Option<&[u8]> {
        self.public_keys
            .iter()
            .find(|k| k.purpose == purpose)
            .map(|k| k.material.as_slice())
    }

    /// Schnorr public keys that may sign for this document.
    fn control_keys(&self, group: &SchnorrGroup) -> Vec<BigUint> {
        self.public_keys
            .iter()
            .filter(|k| k.purpose == KeyPurpose::Authentication)
            .filter_map(|k| group.decode(&k.material))
            .collect()
    }

    pub fn authentication_key(&self, group: &SchnorrGroup) -> Option<BigUint> {
        self.control_keys(group).into_iter().next()
    }

    pub fn assertion_key(&self, group: &SchnorrGroup) -> Option<BigUint> {
        self.key(KeyPurpose::AssertionMethod).and_then(|k| group.decode(k))
    }

    /// What the controller signs to register this version.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut m = b"HIDM/did-register".to_vec();
        m.extend(serde_json::to_vec(self).expect("documents serialize"));
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    Found { doc: DidDocument, revoked: bool },
    NotFound,
}

impl Resolution {
    pub fn active(self) -> Option<DidDocument> {
        match self {
            Resolution::Found { doc, revoked: false } => Some(doc),
            _ => None,
        }
    }
}

#[derive(Debug, Default)]
struct DidState {
    docs: BTreeMap<String, DidDocument>,
    revoked: BTreeSet<String>,
    chain: HashChain,
}

#[derive(Serialize)]
struct DidEvent<'a> {
    op: &'static str,
    did: &'a str,
    version: u64,
}

pub struct DidLedger {
    group: &'static SchnorrGroup,
    governance: Mutex<Option<String>>,
    state: Mutex<DidState>,
}

impl DidLedger {
    pub fn new(group: &'static SchnorrGroup) -> Self {
        DidLedger {
            group,
            governance: Mutex::new(None),
            state: Mutex::new(DidState::default()),
        }
    }

    pub fn with_chain(group: &'static SchnorrGroup, chain: HashChain) -> Self {
        let ledger = Self::new(group);
        ledger.state.lock().expect("lock").chain = chain;
        ledger
    }

    /// Names the DID whose key may revoke documents. Set once.
    pub fn set_governance(&self, did: &str) -> Result<(), LedgerError> {
        let mut g = self.governance.lock().expect("lock");
        if g.is_some() {
            return Err(LedgerError::Unauthorized("governance already set"));
        }
        *g = Some(did.to_string());
        Ok(())
    }

    pub fn register(&self, doc: &DidDocument, proof: &SchnorrSig) -> Result<(), LedgerError> {
        let mut st = self.state.lock().expect("lock");
        let (signers, expected) = match st.docs.get(&doc.did) {
            None => (doc.control_keys(self.group), 1),
            Some(prior) => (prior.control_keys(self.group), prior.version + 1),
        };
        if doc.version != expected {
            return Err(LedgerError::VersionMismatch {
                expected,
                got: doc.version,
            });
        }
        let msg = doc.signing_bytes();
        if !signers.iter().any(|y| schnorr::verify(self.group, &msg, proof, y)) {
            return Err(LedgerError::Unauthorized("proof of control failed"));
        }
        let op = if expected == 1 { "register" } else { "update" };
        let payload = serde_json::to_vec(&DidEvent { op, did: &doc.did, version: doc.version }).expect("serializes");
        st.chain.append(payload)?;
        st.docs.insert(doc.did.clone(), doc.clone());
        Ok(())
    }

    pub fn resolve(&self, did: &str) -> Resolution {
        let st = self.state.lock().expect("lock");
        match st.docs.get(did) {
            Some(doc) => Resolution::Found {
                doc: doc.clone(),
                revoked: st.revoked.contains(did),
            },
            None => Resolution::NotFound,
        }
    }

    pub fn revocation_message(did: &str) -> Vec<u8> {
        let mut m = b"HIDM/did-revoke".to_vec();
        m.extend(did.as_bytes());
        m
    }

    /// Revokes `did` on a signature by the governance DID's control key.
    pub fn revoke(&self, did: &str, proof: &SchnorrSig) -> Result<(), LedgerError> {
        let gov = self
            .governance
            .lock()
            .expect("lock")
            .clone()
            .ok_or(LedgerError::Unauthorized("no governance DID"))?;
        let mut st = self.state.lock().expect("lock");
        let keys = st
            .docs
            .get(&gov)
            .map(|d| d.control_keys(self.group))
            .ok_or_else(|| LedgerError::NotFound(gov.clone()))?;
        if !st.docs.contains_key(did) {
            return Err(LedgerError::NotFound(did.to_string()));
        }
        let msg = Self::revocation_message(did);
        if !keys.iter().any(|y| schnorr::verify(self.group, &msg, proof, y)) {
            return Err(LedgerError::Unauthorized("revocation not signed by governance"));
        }
        let version = st.docs[did].version;
        let payload = serde_json::to_vec(&DidEvent { op: "revoke", did, version }).expect("serializes");
        st.chain.append(payload)?;
        st.revoked.insert(did.to_string());
        Ok(())
    }

    pub fn head(&self) -> [u8; 32] {
        self.state.lock().expect("lock").chain.head()
    }

    pub fn chain_ok(&self) -> bool {
        self.state.lock().expect("lock").chain.verify()
    }
}
