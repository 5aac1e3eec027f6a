//! Scenario configuration and the assembled set of entities and ledgers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::channel::{self, ChannelEnd, Wire};
use super::entities::{Apc, Auditor, AuditorAuthority, Gha, Ho, Hp, Hrr, Identity, Patient, Pta};
use super::episodes::{EpisodeFailure, HealthEntry};
use super::lvc::{self, LegitimacyCredential};
use super::{ActorError, Role};
use crate::algebra::{derive_rng, Codec, G1Element, G2Element, HidmRng, SchnorrGroup};
use crate::clock::{Clock, SimClock, Timestamp};
use crate::credentials::biohash::BioHashConfig;
use crate::credentials::{AtPolicy, BioHashParams};
use crate::ledgers::{
    AdminToken, AtiLedger, AuditLedger, AuditRecord, DidLedger, HashChain, KeyPurpose, OriginModule,
};
use crate::pre::PreHrrKeys;
use crate::proofs::PbpMode;
use crate::signatures::rsa_sig::RsaKeypair;
use crate::signatures::{ClKeypair, ClPublicKey, ClVariant, IbsMasterKey, SchnorrKeypair};

/// 2026-01-01T00:00:00Z.
const DEFAULT_START: i64 = 1_767_225_600;
const DAY: i64 = 24 * 3600;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub patients: usize,
    pub visits: u32,
    pub rotation: bool,
    pub seed: Option<u64>,
    pub hos: usize,
    pub reverify_lvc: bool,
    pub cl_variant: ClVariant,
    pub pbp_mode: PbpMode,
    pub at_validity_secs: i64,
    pub clock_skew_secs: i64,
    pub concurrency: usize,
    pub biometric_noise: f64,
    pub start_time: i64,
    pub days_between_visits: i64,
    pub ledger_dir: Option<PathBuf>,
    pub biohash: BioHashConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let policy = AtPolicy::default();
        ScenarioConfig {
            patients: 100,
            visits: 2,
            rotation: true,
            seed: None,
            hos: 2,
            reverify_lvc: false,
            cl_variant: ClVariant::Pairing,
            pbp_mode: PbpMode::AsWritten,
            at_validity_secs: policy.validity_secs,
            clock_skew_secs: policy.clock_skew_secs,
            concurrency: 1,
            biometric_noise: 0.1,
            start_time: DEFAULT_START,
            days_between_visits: 7,
            ledger_dir: None,
            biohash: BioHashConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Rejects values no run can use.
    pub fn validate(&self) -> Result<(), String> {
        let checks = [
            (self.patients == 0, "patients must be at least 1"),
            (self.visits == 0, "visits must be at least 1"),
            (self.hos == 0, "hos must be at least 1"),
            (self.concurrency == 0, "concurrency must be at least 1"),
            (self.at_validity_secs <= 0, "at_validity_secs must be positive"),
            (self.clock_skew_secs < 0, "clock_skew_secs must not be negative"),
            (self.days_between_visits < 0, "days_between_visits must not be negative"),
            (
                !(self.biometric_noise.is_finite() && self.biometric_noise >= 0.0),
                "biometric_noise must be a non-negative number",
            ),
            (self.biohash.dimension == 0, "biohash.dimension must be positive"),
        ];
        match checks.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(msg.to_string()),
            None => Ok(()),
        }
    }

    pub fn at_policy(&self) -> AtPolicy {
        AtPolicy {
            validity_secs: self.at_validity_secs,
            clock_skew_secs: self.clock_skew_secs,
        }
    }
}

/// Result of one complete E1–E8 visit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitOutcome {
    pub visit: u32,
    pub ho: usize,
    pub pseudonym: String,
    /// Entries returned by the read access, before this visit's write.
    pub read: Vec<HealthEntry>,
    pub written: HealthEntry,
    pub issuance_events: usize,
    pub access_events: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatientReport {
    pub index: usize,
    pub did: String,
    pub visits: Vec<VisitOutcome>,
    pub failure: Option<EpisodeFailure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub patients: Vec<PatientReport>,
}

impl RunReport {
    pub fn failures(&self) -> Vec<&EpisodeFailure> {
        self.patients.iter().filter_map(|p| p.failure.as_ref()).collect()
    }

    pub fn completed_visits(&self) -> usize {
        self.patients.iter().map(|p| p.visits.len()).sum()
    }

    pub fn issuance_events(&self) -> usize {
        self.patients.iter().flat_map(|p| &p.visits).map(|v| v.issuance_events).sum()
    }

    pub fn access_events(&self) -> usize {
        self.patients.iter().flat_map(|p| &p.visits).map(|v| v.access_events).sum()
    }
}

pub struct World {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub group: &'static SchnorrGroup,
    pub clock: SimClock,
    pub dids: DidLedger,
    pub ati: AtiLedger,
    pub audit: AuditLedger,
    pub(crate) admin: AdminToken,
    pub wire: Arc<Wire>,
    pub bio: BioHashParams,
    pub gha: Gha,
    pub authority: AuditorAuthority,
    pub auditor: Auditor,
    pub apc: Apc,
    pub pta: Pta,
    pub hos: Vec<Ho>,
    /// Two professionals per organization: `2*i` may read and write,
    /// `2*i + 1` may only read.
    pub hps: Vec<Hp>,
    pub hrr: Hrr,
    pub(crate) audit_nonces: Mutex<BTreeSet<[u8; 16]>>,
}

fn chain(dir: &Option<PathBuf>, name: &str) -> Result<HashChain, ActorError> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| crate::ledgers::LedgerError::Io(e.to_string()))?;
            Ok(HashChain::persisted(d.join(name))?)
        }
        None => Ok(HashChain::new()),
    }
}

impl World {
    pub fn new(config: ScenarioConfig) -> Result<World, ActorError> {
        config.validate().map_err(ActorError::Malformed)?;
        let seed = config.seed.unwrap_or_else(rand::random);
        let group = SchnorrGroup::standard();
        let mut rng = derive_rng(seed, "setup");
        let clock = SimClock::new(Timestamp(config.start_time));
        let now = clock.now();

        let dids = DidLedger::with_chain(group, chain(&config.ledger_dir, "did.jsonl")?);
        let ati = AtiLedger::with_chain(chain(&config.ledger_dir, "ati.jsonl")?);
        let audit = AuditLedger::with_chain(group, chain(&config.ledger_dir, "audit.jsonl")?);

        let rsa_json = |k: &RsaKeypair| serde_json::to_vec(k.public()).expect("serializes");

        let gha = Gha {
            id: Identity::new(Role::GHA, "did:hidm:gha", &mut rng),
            rsa: RsaKeypair::reference(0),
        };
        gha.id.register(&dids, vec![(KeyPurpose::RsaAssertion, rsa_json(&gha.rsa))], &mut rng)?;
        dids.set_governance(&gha.id.did)?;
        let issue = |did: &str, role: Role, scope: &[&str]| lvc::issue(&gha.rsa, &gha.id.did, did, role, scope, now);

        let authority_id = Identity::new(Role::AuditorAuthority, "did:hidm:auditor-authority", &mut rng);
        let authority_rsa = RsaKeypair::reference(1);
        authority_id.register(&dids, vec![(KeyPurpose::RsaAssertion, rsa_json(&authority_rsa))], &mut rng)?;
        let authority = AuditorAuthority {
            lvc: issue(&authority_id.did, Role::AuditorAuthority, &["audit", "warrant"]),
            id: authority_id,
            rsa: authority_rsa,
        };

        let auditor = Auditor {
            id: Identity::new(Role::Auditor, "did:hidm:auditor", &mut rng),
        };
        auditor.id.register(&dids, vec![], &mut rng)?;

        let apc_id = Identity::new(Role::APC, "did:hidm:apc", &mut rng);
        let cl = ClKeypair::generate(config.cl_variant, crate::credentials::pcred::SLOT_COUNT, &mut rng);
        let token_key = SchnorrKeypair::generate(group, &mut rng);
        let ibs = IbsMasterKey::generate(&mut rng);
        apc_id.register(
            &dids,
            vec![
                (KeyPurpose::AssertionMethod, group.encode(token_key.public())),
                (
                    KeyPurpose::CredentialIssuance,
                    serde_json::to_vec(&cl.public()).expect("serializes"),
                ),
                (KeyPurpose::IbsMaster, ibs.public().to_bytes()),
            ],
            &mut rng,
        )?;
        let apc = Apc {
            lvc: issue(&apc_id.did, Role::APC, &["issue-credential", "issue-token", "extract-key"]),
            id: apc_id,
            cl,
            token_key,
            ibs,
            store: Mutex::default(),
        };

        let pta_id = Identity::new(Role::PTA, "did:hidm:pta", &mut rng);
        let pta_key = SchnorrKeypair::generate(group, &mut rng);
        pta_id.register(&dids, vec![(KeyPurpose::AssertionMethod, group.encode(pta_key.public()))], &mut rng)?;
        let pta = Pta {
            lvc: issue(&pta_id.did, Role::PTA, &["issue-token"]),
            id: pta_id,
            key: pta_key,
            store: Mutex::default(),
        };

        let hrr_id = Identity::new(Role::HRR, "did:hidm:hrr", &mut rng);
        let hrr_keys = PreHrrKeys::generate(&mut rng);
        hrr_id.register(&dids, vec![(KeyPurpose::PreTarget, hrr_keys.public().to_bytes())], &mut rng)?;
        let hrr = Hrr {
            lvc: issue(&hrr_id.did, Role::HRR, &["store"]),
            id: hrr_id,
            keys: hrr_keys,
            records: Mutex::new(BTreeMap::new()),
        };

        let mut hos = Vec::new();
        let mut hps = Vec::new();
        for i in 0..config.hos {
            let id = Identity::new(Role::HO, format!("did:hidm:ho:{i}"), &mut rng);
            id.register(&dids, vec![], &mut rng)?;
            hos.push(Ho {
                lvc: issue(&id.did, Role::HO, &["book", "verify", "consult"]),
                id,
                bookings: Mutex::default(),
            });
            for (suffix, scope) in [("rw", &["read", "write"][..]), ("ro", &["read"][..])] {
                let id = Identity::new(Role::HP, format!("did:hidm:hp:{i}-{suffix}"), &mut rng);
                id.register(&dids, vec![], &mut rng)?;
                hps.push(Hp {
                    lvc: issue(&id.did, Role::HP, scope),
                    id,
                    ho: i,
                });
            }
        }

        audit.register_writer(&apc.id.did, OriginModule::APC, apc.id.auth().public().clone());
        audit.register_writer(&pta.id.did, OriginModule::PTA, pta.id.auth().public().clone());
        audit.register_writer(&hrr.id.did, OriginModule::HRR, hrr.id.auth().public().clone());
        audit.register_writer(&auditor.id.did, OriginModule::Auditor, auditor.id.auth().public().clone());
        for ho in &hos {
            audit.register_writer(&ho.id.did, OriginModule::HO, ho.id.auth().public().clone());
        }
        for hp in &hps {
            audit.register_writer(&hp.id.did, OriginModule::HP, hp.id.auth().public().clone());
        }

        Ok(World {
            bio: BioHashParams::new(config.biohash),
            config,
            seed,
            group,
            clock,
            dids,
            ati,
            audit,
            admin: AdminToken::new(),
            wire: Wire::new(),
            gha,
            authority,
            auditor,
            apc,
            pta,
            hos,
            hps,
            hrr,
            audit_nonces: Mutex::default(),
        })
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    /// Independent stream for one named use.
    pub fn rng(&self, label: &str) -> HidmRng {
        derive_rng(self.seed, label)
    }

    pub fn admin_token(&self) -> &AdminToken {
        &self.admin
    }

    /// Creates patient `index` and registers its DID.
    pub fn new_patient(&self, index: usize) -> Result<Patient, ActorError> {
        let mut rng = self.rng(&format!("patient/{index}"));
        let patient = Patient::synthetic(index, &self.bio, &mut rng);
        patient.id.register(&self.dids, vec![], &mut rng)?;
        Ok(patient)
    }

    /// Authenticated channel between two registered identities.
    pub fn connect(&self, a: &Identity, b: &Identity, label: &str) -> Result<(ChannelEnd, ChannelEnd), ActorError> {
        let mut ra = self.rng(&format!("{label}/chan-a"));
        let mut rb = self.rng(&format!("{label}/chan-b"));
        Ok(channel::establish(a, b, &self.dids, &self.wire, &mut ra, &mut rb)?)
    }

    /// `presenter` sends its legitimacy credential; `verifier` checks it
    /// against the channel peer.
    pub fn present_lvc(
        &self,
        presenter: &mut ChannelEnd,
        verifier: &mut ChannelEnd,
        lvc: &LegitimacyCredential,
        expected: Role,
    ) -> Result<LegitimacyCredential, ActorError> {
        let received: LegitimacyCredential = channel::transfer(presenter, verifier, "lvc", lvc)?;
        if !lvc::verify(&received, expected, verifier.peer_did(), &self.dids, &self.gha.id.did) {
            return Err(ActorError::IllegitimatePeer(expected));
        }
        Ok(received)
    }

    /// Signs `record` as `writer` and appends it.
    pub fn log<R: RngCore + CryptoRng>(&self, writer: &Identity, record: AuditRecord, rng: &mut R) -> Result<u64, ActorError> {
        let sig = writer.sign(&record.signing_bytes(), rng);
        Ok(self.audit.append(&record, &writer.did, &sig)?)
    }

    fn doc_key(&self, did: &str, purpose: KeyPurpose) -> Result<Vec<u8>, ActorError> {
        self.dids
            .resolve(did)
            .active()
            .and_then(|d| d.key(purpose).map(<[u8]>::to_vec))
            .ok_or(ActorError::State("issuer key does not resolve"))
    }

    pub fn apc_cl_public(&self) -> Result<ClPublicKey, ActorError> {
        serde_json::from_slice(&self.doc_key(&self.apc.id.did, KeyPurpose::CredentialIssuance)?)
            .map_err(|e| ActorError::Malformed(e.to_string()))
    }

    pub fn apc_token_public(&self) -> Result<BigUint, ActorError> {
        self.group
            .decode(&self.doc_key(&self.apc.id.did, KeyPurpose::AssertionMethod)?)
            .ok_or(ActorError::State("token key is not a group element"))
    }

    pub fn apc_ibs_public(&self) -> Result<G2Element, ActorError> {
        G2Element::from_bytes(&self.doc_key(&self.apc.id.did, KeyPurpose::IbsMaster)?)
            .map_err(|e| ActorError::Malformed(e.to_string()))
    }

    pub fn pta_public(&self) -> Result<BigUint, ActorError> {
        self.group
            .decode(&self.doc_key(&self.pta.id.did, KeyPurpose::AssertionMethod)?)
            .ok_or(ActorError::State("PTA key is not a group element"))
    }

    pub fn hrr_public(&self) -> Result<G1Element, ActorError> {
        G1Element::from_bytes(&self.doc_key(&self.hrr.id.did, KeyPurpose::PreTarget)?)
            .map_err(|e| ActorError::Malformed(e.to_string()))
    }

    /// The read-write professional employed by organization `ho`.
    pub fn hp_for(&self, ho: usize) -> &Hp {
        &self.hps[2 * ho]
    }

    /// The read-only professional employed by organization `ho`.
    pub fn read_only_hp_for(&self, ho: usize) -> &Hp {
        &self.hps[2 * ho + 1]
    }

    /// Revokes `did` with the governance key.
    pub fn revoke(&self, did: &str) -> Result<(), ActorError> {
        let mut rng = self.rng(&format!("revoke/{did}"));
        let sig = self.gha.id.sign(&DidLedger::revocation_message(did), &mut rng);
        Ok(self.dids.revoke(did, &sig)?)
    }

    /// Runs every configured visit for every patient. Patients are split
    /// across `concurrency` worker threads; visit rounds are separated by
    /// `days_between_visits` of simulated time.
    pub fn run(&self) -> Result<(Vec<Patient>, RunReport), ActorError> {
        let mut patients = (0..self.config.patients)
            .map(|i| self.new_patient(i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut reports: Vec<PatientReport> = patients
            .iter()
            .map(|p| PatientReport {
                index: p.index,
                did: p.id.did.clone(),
                visits: Vec::new(),
                failure: None,
            })
            .collect();
        let workers = self.config.concurrency.min(patients.len()).max(1);
        for visit in 1..=self.config.visits {
            if visit > 1 {
                self.clock.advance(self.config.days_between_visits * DAY);
            }
            let chunk = patients.len().div_ceil(workers);
            std::thread::scope(|s| {
                for (ps, rs) in patients.chunks_mut(chunk).zip(reports.chunks_mut(chunk)) {
                    s.spawn(move || {
                        for (p, r) in ps.iter_mut().zip(rs.iter_mut()) {
                            if r.failure.is_some() {
                                continue;
                            }
                            match self.run_visit(p, visit) {
                                Ok(outcome) => r.visits.push(outcome),
                                Err(f) => r.failure = Some(f),
                            }
                        }
                    });
                }
            });
        }
        Ok((
            patients,
            RunReport {
                seed: self.seed,
                patients: reports,
            },
        ))
    }
}
