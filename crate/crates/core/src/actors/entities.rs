//! Entity key material and private stores.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::episodes::HealthEntry;
use super::lvc::LegitimacyCredential;
use super::Role;
use crate::algebra::{Codec, SchnorrGroup};
use crate::clock::Timestamp;
use crate::credentials::{ApcStore, AppointmentToken, BioHashParams, PatientCredential, PiiBundle, PseudonymToken, PtaStore};
use crate::ledgers::{DidDocument, DidKey, DidLedger, KeyPurpose, LedgerError};
use crate::pre::{Pai, PreHrrKeys, PrePatientKeys, Pseudonym, PseudonymWitness};
use crate::signatures::rsa_sig::RsaKeypair;
use crate::signatures::{schnorr, ClKeypair, IbsMasterKey, IbsUserKey, SchnorrKeypair};

/// A DID and the Schnorr key that controls it.
pub struct Identity {
    pub did: String,
    pub role: Role,
    auth: SchnorrKeypair,
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Identity").field("did", &self.did).field("role", &self.role).finish_non_exhaustive()
    }
}

impl Identity {
    pub fn new<R: RngCore + CryptoRng>(role: Role, did: impl Into<String>, rng: &mut R) -> Self {
        Identity {
            did: did.into(),
            role,
            auth: SchnorrKeypair::generate(SchnorrGroup::standard(), rng),
        }
    }

    pub fn auth(&self) -> &SchnorrKeypair {
        &self.auth
    }

    /// Version-1 document with the authentication key plus `extra`.
    pub fn document(&self, extra: Vec<(KeyPurpose, Vec<u8>)>) -> DidDocument {
        let group = SchnorrGroup::standard();
        let mut keys = vec![DidKey {
            id: format!("{}#auth", self.did),
            purpose: KeyPurpose::Authentication,
            material: group.encode(self.auth.public()),
        }];
        for (i, (purpose, material)) in extra.into_iter().enumerate() {
            keys.push(DidKey {
                id: format!("{}#key-{}", self.did, i + 1),
                purpose,
                material,
            });
        }
        DidDocument {
            did: self.did.clone(),
            public_keys: keys,
            service_endpoints: vec![format!("hidm://{}", self.did)],
            version: 1,
        }
    }

    pub fn register<R: RngCore + CryptoRng>(
        &self,
        dids: &DidLedger,
        extra: Vec<(KeyPurpose, Vec<u8>)>,
        rng: &mut R,
    ) -> Result<(), LedgerError> {
        let doc = self.document(extra);
        let proof = schnorr::sign(SchnorrGroup::standard(), &self.auth, &doc.signing_bytes(), rng);
        dids.register(&doc, &proof)
    }

    pub fn sign<R: RngCore + CryptoRng>(&self, msg: &[u8], rng: &mut R) -> crate::signatures::SchnorrSig {
        schnorr::sign(SchnorrGroup::standard(), &self.auth, msg, rng)
    }
}

/// Health authority: DID governance and legitimacy credential issuer.
pub struct Gha {
    pub id: Identity,
    pub rsa: RsaKeypair,
}

/// Signs warrants; holds a legitimacy credential from the health authority.
pub struct AuditorAuthority {
    pub id: Identity,
    pub rsa: RsaKeypair,
    pub lvc: LegitimacyCredential,
}

/// Logs trace disclosures.
pub struct Auditor {
    pub id: Identity,
}

pub struct Apc {
    pub id: Identity,
    pub lvc: LegitimacyCredential,
    pub cl: ClKeypair,
    /// Partially blind signing key for appointment tokens.
    pub token_key: SchnorrKeypair,
    pub ibs: IbsMasterKey,
    pub(crate) store: Mutex<ApcStore>,
}

impl Apc {
    pub fn enrolled(&self) -> usize {
        self.store.lock().expect("lock").len()
    }

    /// Serialized private store, for inspection.
    pub fn store_json(&self) -> String {
        serde_json::to_string(&*self.store.lock().expect("lock")).expect("serializes")
    }
}

pub struct Pta {
    pub id: Identity,
    pub lvc: LegitimacyCredential,
    pub key: SchnorrKeypair,
    pub(crate) store: Mutex<PtaStore>,
}

impl Pta {
    pub fn issued(&self) -> usize {
        self.store.lock().expect("lock").len()
    }

    pub fn store_json(&self) -> String {
        serde_json::to_string(&*self.store.lock().expect("lock")).expect("serializes")
    }
}

/// What a healthcare organization keeps per appointment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Booking {
    pub pseudonym: String,
    pub pai: Pai,
    pub ati: String,
    pub exp: Timestamp,
    pub confirmation: String,
    pub schedule: String,
    pub verified: bool,
}

impl Booking {
    /// Every value in the booking that could identify its holder.
    pub fn identifier_fields(&self) -> Vec<String> {
        let mut fields = vec![
            self.pseudonym.clone(),
            self.pai.pseudonym.p1.to_hex(),
            self.pai.pseudonym.p2.to_hex(),
            self.pai.rk.to_hex(),
            self.pai.pk_patient.to_hex(),
            hex::encode(&self.pai.ct),
            self.ati.clone(),
            self.confirmation.clone(),
        ];
        fields.dedup();
        fields
    }
}

pub struct Ho {
    pub id: Identity,
    pub lvc: LegitimacyCredential,
    pub(crate) bookings: Mutex<Vec<Booking>>,
}

impl Ho {
    pub fn new(id: Identity, lvc: LegitimacyCredential) -> Self {
        Ho {
            id,
            lvc,
            bookings: Mutex::default(),
        }
    }

    pub fn bookings(&self) -> Vec<Booking> {
        self.bookings.lock().expect("lock").clone()
    }
}

pub struct Hp {
    pub id: Identity,
    pub lvc: LegitimacyCredential,
    pub ho: usize,
}

pub struct Hrr {
    pub id: Identity,
    pub lvc: LegitimacyCredential,
    pub keys: PreHrrKeys,
    pub(crate) records: Mutex<BTreeMap<String, Vec<HealthEntry>>>,
}

impl Hrr {
    pub fn record_count(&self) -> usize {
        self.records.lock().expect("lock").values().map(Vec::len).sum()
    }
}

/// Everything the patient holds between episodes.
#[derive(Default)]
pub struct Wallet {
    pub pcred: Option<PatientCredential>,
    pub pre_keys: Option<PrePatientKeys>,
    pub pai: Option<Pai>,
    pub(crate) witness: Option<PseudonymWitness>,
    pub pt: Option<PseudonymToken>,
    pub sk_p: Option<IbsUserKey>,
    pub at: Option<AppointmentToken>,
    /// HO index and confirmation code of the current booking.
    pub booking: Option<(usize, String)>,
    /// Every pseudonym used so far with its signing key.
    pub pseudonym_keys: Vec<(Pseudonym, IbsUserKey)>,
}

pub struct Patient {
    pub index: usize,
    pub id: Identity,
    pub pii: PiiBundle,
    pub features: Vec<f64>,
    pub wallet: Wallet,
    episodes: u64,
}

impl Patient {
    /// Synthetic patient with plausible PII and a biometric template.
    pub fn synthetic<R: RngCore + CryptoRng>(index: usize, bio: &BioHashParams, rng: &mut R) -> Self {
        let mut tag = [0u8; 8];
        rng.fill_bytes(&mut tag);
        let pii = PiiBundle {
            full_name: format!("Patient{index:05} Surname{:04}", rng.gen_range(0..10_000)),
            date_of_birth: format!(
                "{:04}-{:02}-{:02}",
                rng.gen_range(1930..2010),
                rng.gen_range(1..=12),
                rng.gen_range(1..=28)
            ),
            national_id: format!("NID{:012}", rng.gen_range(0..1_000_000_000_000u64)),
            address: format!("{} Example Street, Unit {index}", rng.gen_range(1..999)),
        };
        Patient {
            index,
            id: Identity::new(Role::Patient, format!("did:hidm:patient:{}", hex::encode(tag)), rng),
            pii,
            features: bio.random_features(rng),
            wallet: Wallet::default(),
            episodes: 0,
        }
    }

    /// Unique randomness label for the next episode this patient runs.
    pub fn next_scope(&mut self, episode: &str) -> String {
        self.episodes += 1;
        format!("p{}/{}/{}", self.index, self.episodes, episode)
    }

    pub fn patient_id(&self) -> Option<&[u8]> {
        self.wallet.pcred.as_ref().map(|c| c.patient_id.as_slice())
    }

    pub fn pseudonym(&self) -> Option<&Pseudonym> {
        self.wallet.pai.as_ref().map(|p| &p.pseudonym)
    }
}
