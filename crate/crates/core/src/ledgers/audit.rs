//! Tiered audit ledger.
//!
//! Writers are registered per DID with the module they act as and a
//! Schnorr key; every append is signed, so one module cannot log as
//! another. Queries need a [`VerifiedAccess`], which only the actor layer
//! can mint after checking a patient proof or an authority credential.
//! Query metadata goes to a third, administrator-only tier.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{HashChain, LedgerError};
use crate::algebra::SchnorrGroup;
use crate::clock::Timestamp;
use crate::signatures::{schnorr, SchnorrSig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OriginModule {
    APC,
    PTA,
    HO,
    HP,
    HRR,
    Auditor,
}

impl fmt::Display for OriginModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventType {
    PatientCredentialIssuance,
    PseudonymTokenIssuance,
    PseudonymKeyIssuance,
    AppointmentTokenIssuance,
    AppointmentBooked,
    IdentityVerification,
    ConsultationAuthorized,
    HealthRecordRead,
    HealthRecordWrite,
    HealthRecordAccess,
    TraceDisclosure,
}

impl EventType {
    /// Credential and token issuance (episodes 1–4).
    pub fn is_issuance(self) -> bool {
        matches!(
            self,
            EventType::PatientCredentialIssuance
                | EventType::PseudonymTokenIssuance
                | EventType::PseudonymKeyIssuance
                | EventType::AppointmentTokenIssuance
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessLevel {
    PatientAccessible,
    AuditorAuthorityAccessible,
}

/// A record as written; the ledger assigns `logID` on append.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AuditRecord {
    #[serde(rename = "logID")]
    pub log_id: u64,
    pub timestamp: Timestamp,
    pub origin_module: OriginModule,
    pub event_type: EventType,
    pub access_level: AccessLevel,
    pub patient_identifier: String,
    pub healthcare_professional_identifier: Option<String>,
    pub event_details: BTreeMap<String, String>,
}

impl AuditRecord {
    pub fn draft(
        timestamp: Timestamp,
        origin: OriginModule,
        event: EventType,
        level: AccessLevel,
        patient_identifier: String,
    ) -> Self {
        AuditRecord {
            log_id: 0,
            timestamp,
            origin_module: origin,
            event_type: event,
            access_level: level,
            patient_identifier,
            healthcare_professional_identifier: None,
            event_details: BTreeMap::new(),
        }
    }

    pub fn with_hp(mut self, hp: &str) -> Self {
        self.healthcare_professional_identifier = Some(hp.to_string());
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<String>) -> Self {
        self.event_details.insert(key.to_string(), value.into());
        self
    }

    /// Bytes a writer signs: the record with `logID` zeroed.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut unsigned = self.clone();
        unsigned.log_id = 0;
        let mut m = b"HIDM/audit".to_vec();
        m.extend(serde_json::to_vec(&unsigned).expect("records serialize"));
        m
    }
}

/// An authenticated query role. Opaque outside the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifiedAccess(Access);

#[derive(Clone, Debug, PartialEq, Eq)]
enum Access {
    Patient { identifiers: BTreeSet<String> },
    Authority { did: String },
}

impl VerifiedAccess {
    pub(crate) fn patient(identifiers: BTreeSet<String>) -> Self {
        VerifiedAccess(Access::Patient { identifiers })
    }

    pub(crate) fn authority(did: &str) -> Self {
        VerifiedAccess(Access::Authority { did: did.to_string() })
    }
}

/// Conjunction of `field=value` clauses over record fields; detail keys are
/// addressed as `eventDetails.<key>`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditFilter {
    clauses: Vec<(String, String)>,
}

const FILTER_FIELDS: [&str; 7] = [
    "logID",
    "timestamp",
    "originModule",
    "eventType",
    "accessLevel",
    "patientIdentifier",
    "healthcareProfessionalIdentifier",
];

impl AuditFilter {
    pub fn all() -> Self {
        Self::default()
    }

    /// Parses `k=v` clauses separated by `,` or `&`.
    pub fn parse(s: &str) -> Result<Self, LedgerError> {
        let mut clauses = Vec::new();
        for part in s.split([',', '&']).map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| LedgerError::BadFilter(part.to_string()))?;
            let known = FILTER_FIELDS.contains(&k) || k.strip_prefix("eventDetails.").is_some_and(|d| !d.is_empty());
            if !known {
                return Err(LedgerError::BadFilter(part.to_string()));
            }
            clauses.push((k.to_string(), v.to_string()));
        }
        Ok(AuditFilter { clauses })
    }

    pub fn and(mut self, field: &str, value: &str) -> Self {
        self.clauses.push((field.to_string(), value.to_string()));
        self
    }

    pub fn matches(&self, record: &AuditRecord) -> bool {
        let v = serde_json::to_value(record).expect("records serialize");
        self.clauses.iter().all(|(k, want)| {
            let got = match k.strip_prefix("eventDetails.") {
                Some(d) => v["eventDetails"].get(d),
                None => v.get(k.as_str()),
            };
            match got {
                Some(serde_json::Value::String(s)) => s == want,
                Some(serde_json::Value::Number(n)) => n.to_string() == *want,
                _ => false,
            }
        })
    }
}

/// Capability for the administrator-only metadata tier.
#[derive(Debug)]
pub struct AdminToken(());

impl AdminToken {
    pub(crate) fn new() -> Self {
        AdminToken(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryMetadata {
    pub role: String,
    pub filter_clauses: usize,
    pub returned: usize,
}

#[derive(Debug, Default)]
struct AuditState {
    writers: BTreeMap<String, (OriginModule, BigUint)>,
    records: Vec<AuditRecord>,
    chain: HashChain,
    admin: Vec<QueryMetadata>,
}

pub struct AuditLedger {
    group: &'static SchnorrGroup,
    state: Mutex<AuditState>,
}

impl AuditLedger {
    pub fn new(group: &'static SchnorrGroup) -> Self {
        Self::with_chain(group, HashChain::new())
    }

    pub fn with_chain(group: &'static SchnorrGroup, chain: HashChain) -> Self {
        AuditLedger {
            group,
            state: Mutex::new(AuditState {
                chain,
                ..AuditState::default()
            }),
        }
    }

    pub fn register_writer(&self, did: &str, module: OriginModule, public: BigUint) {
        self.state
            .lock()
            .expect("lock")
            .writers
            .insert(did.to_string(), (module, public));
    }

    /// Appends a signed record and returns its `logID`.
    pub fn append(&self, record: &AuditRecord, writer_did: &str, sig: &SchnorrSig) -> Result<u64, LedgerError> {
        let mut st = self.state.lock().expect("lock");
        let (module, public) = st
            .writers
            .get(writer_did)
            .cloned()
            .ok_or_else(|| LedgerError::UnknownWriter(writer_did.to_string()))?;
        if module != record.origin_module {
            return Err(LedgerError::OriginMismatch {
                writer: writer_did.to_string(),
                claimed: record.origin_module.to_string(),
            });
        }
        if !schnorr::verify(self.group, &record.signing_bytes(), sig, &public) {
            return Err(LedgerError::Unauthorized("audit signature"));
        }
        let mut stored = record.clone();
        stored.log_id = st.records.len() as u64 + 1;
        let payload = serde_json::to_vec(&stored).expect("records serialize");
        st.chain.append(payload)?;
        st.records.push(stored.clone());
        Ok(stored.log_id)
    }

    pub fn query(&self, access: &VerifiedAccess, filter: &AuditFilter) -> Vec<AuditRecord> {
        let mut st = self.state.lock().expect("lock");
        let out: Vec<AuditRecord> = st
            .records
            .iter()
            .filter(|r| match &access.0 {
                Access::Patient { identifiers } => {
                    r.access_level == AccessLevel::PatientAccessible && identifiers.contains(&r.patient_identifier)
                }
                Access::Authority { .. } => r.access_level == AccessLevel::AuditorAuthorityAccessible,
            })
            .filter(|r| filter.matches(r))
            .cloned()
            .collect();
        let role = match &access.0 {
            Access::Patient { .. } => "patient".to_string(),
            Access::Authority { did } => format!("authority:{did}"),
        };
        st.admin.push(QueryMetadata {
            role,
            filter_clauses: filter.clauses.len(),
            returned: out.len(),
        });
        out
    }

    pub fn admin_metadata(&self, _token: &AdminToken) -> Vec<QueryMetadata> {
        self.state.lock().expect("lock").admin.clone()
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("lock").records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn chain_ok(&self) -> bool {
        self.state.lock().expect("lock").chain.verify()
    }

    /// Every record regardless of tier; for tests and offline inspection
    /// of a simulated deployment.
    pub fn snapshot(&self, _token: &AdminToken) -> Vec<AuditRecord> {
        self.state.lock().expect("lock").records.clone()
    }
}
