//! The eight episodes, each run over its own authenticated channel.

use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::channel::transfer;
use super::entities::{Booking, Patient};
use super::lvc::{self, LegitimacyCredential};
use super::world::{VisitOutcome, World};
use super::{ActorError, Role};
use crate::algebra::{hex_bytes, hex_elem, hex_uint, tagged_digest, G1Element, G2Element};
use crate::clock::Timestamp;
use crate::credentials::at::{self, AtStatus};
use crate::credentials::biohash::add_noise;
use crate::credentials::pcred::{self, SLOT_BIOHASH, SLOT_PATIENT_ID};
use crate::credentials::pt::{self, PtRequest};
use crate::credentials::{AppointmentToken, BioHash, CredentialError, PatientCredential, PiiBundle, PseudonymToken};
use crate::ledgers::{AccessLevel, AtiStatus, AuditRecord, EventType, OriginModule};
use crate::pre::{self, HrrPseudonym, Pai, PrePatientKeys, Pseudonym, SYSTEM_SALT};
use crate::proofs::{pbp, pok, PbProof, PoKPCred};
use crate::signatures::ibs::{self, BlindExtraction};
use crate::signatures::{schnorr, ClPublicKey, IbsSignature, SchnorrSig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Episode {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
}

impl Episode {
    pub fn name(self) -> &'static str {
        match self {
            Episode::E1 => "patient credential issuance",
            Episode::E2 => "pseudonym token issuance",
            Episode::E3 => "pseudonym key issuance",
            Episode::E4 => "appointment token issuance",
            Episode::E5 => "appointment booking",
            Episode::E6 => "identity verification",
            Episode::E7 => "consultation authorization",
            Episode::E8 => "health record access",
        }
    }
}

impl fmt::Display for Episode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ({})", self, self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{episode}: {error}")]
pub struct EpisodeFailure {
    pub episode: Episode,
    #[serde(serialize_with = "display")]
    pub error: ActorError,
}

fn display<S: serde::Serializer>(e: &ActorError, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(e)
}

/// Record entry kinds, a reduced stand-in for FHIR resource types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryType {
    Observation,
    Prescription,
    Note,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthEntry {
    pub timestamp: Timestamp,
    pub hp: String,
    pub entry_type: EntryType,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AccessType {
    Read,
    Write { entry_type: EntryType, content: String },
}

impl AccessType {
    pub fn scope_name(&self) -> &'static str {
        match self {
            AccessType::Read => "read",
            AccessType::Write { .. } => "write",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordView {
    pub entries: Vec<HealthEntry>,
}

#[derive(Serialize, Deserialize)]
struct Challenge {
    #[serde(with = "hex_bytes")]
    nonce: [u8; 16],
}

#[derive(Serialize, Deserialize)]
struct EnrollRequest {
    did_patient: String,
    pii: PiiBundle,
    #[serde(with = "hex_bytes")]
    biohash: BioHash,
}

#[derive(Serialize, Deserialize)]
struct PtIssueRequest {
    pok: PoKPCred,
    pseudonym: Pseudonym,
    #[serde(with = "hex_elem")]
    pk_patient: G2Element,
    pbp: PbProof,
}

#[derive(Serialize, Deserialize)]
struct KeyRequest {
    pok: PoKPCred,
    #[serde(with = "hex_elem")]
    blinded: G1Element,
}

#[derive(Serialize, Deserialize)]
struct KeyResponse {
    #[serde(with = "hex_elem")]
    key: G1Element,
}

#[derive(Serialize, Deserialize)]
struct TokenRequest {
    pok: PoKPCred,
}

#[derive(Serialize, Deserialize)]
struct TokenCommitment {
    #[serde(with = "hex_uint")]
    commitment: BigUint,
    exp: Timestamp,
}

#[derive(Serialize, Deserialize)]
struct TokenScalar {
    #[serde(with = "hex_uint")]
    value: BigUint,
}

#[derive(Serialize, Deserialize)]
pub struct AppointmentRequest {
    pub pai: Pai,
    pub at: AppointmentToken,
    pub schedule: String,
    pub sig: IbsSignature,
}

#[derive(Serialize, Deserialize)]
struct Confirmation {
    code: String,
}

#[derive(Serialize, Deserialize)]
struct VerificationRequest {
    pseudonym: Pseudonym,
    confirmation: String,
    pok: PoKPCred,
    pt: PseudonymToken,
    sig: IbsSignature,
}

#[derive(Serialize, Deserialize)]
struct VerificationResult {
    verified: bool,
}

#[derive(Serialize, Deserialize)]
struct Handoff {
    pai: Pai,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccessBody {
    pub hp_lvc: LegitimacyCredential,
    pub access: AccessType,
    pub p_hrr: HrrPseudonym,
    #[serde(with = "hex_bytes")]
    pub ct: Vec<u8>,
    pub pseudonym: String,
    pub timestamp: Timestamp,
}

impl AccessBody {
    pub fn signing_bytes(&self) -> Vec<u8> {
        tagged_digest(b"HIDM/access", &[&serde_json::to_vec(self).expect("serializes")]).to_vec()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccessRequest {
    pub body: AccessBody,
    pub sig: SchnorrSig,
}

/// Verifier-chosen proof context: episode, verifier DID, nonce.
pub fn proof_context(episode: &str, verifier: &str, nonce: &[u8; 16]) -> Vec<u8> {
    tagged_digest(b"HIDM/pok-context", &[episode.as_bytes(), verifier.as_bytes(), nonce]).to_vec()
}

/// What the patient signs with the pseudonym key when booking.
pub fn booking_message(pai: &Pai, at: &AppointmentToken, schedule: &str) -> Vec<u8> {
    let pai = serde_json::to_vec(pai).expect("serializes");
    let at = serde_json::to_vec(at).expect("serializes");
    tagged_digest(b"HIDM/booking", &[&pai, &at, schedule.as_bytes()]).to_vec()
}

fn verification_message(code: &str, nonce: &[u8; 16], ho: &str) -> Vec<u8> {
    tagged_digest(b"HIDM/verify", &[code.as_bytes(), nonce, ho.as_bytes()]).to_vec()
}

fn nonce<R: RngCore>(rng: &mut R) -> [u8; 16] {
    let mut n = [0u8; 16];
    rng.fill_bytes(&mut n);
    n
}

fn credential(p: &Patient) -> Result<&PatientCredential, ActorError> {
    p.wallet.pcred.as_ref().ok_or(ActorError::State("patient holds no credential"))
}

fn prove(
    cred: &PatientCredential,
    pk: &ClPublicKey,
    disclose: &[usize],
    context: &[u8],
    rng: &mut crate::algebra::HidmRng,
) -> Result<PoKPCred, ActorError> {
    pok::prove(&cred.slots(), &cred.sig, pk, disclose, context, rng)
        .map_err(|_| ActorError::BadArtifact("credential does not verify under the issuer key"))
}

fn disclosed_patient_id(proof: &PoKPCred) -> Result<String, ActorError> {
    proof
        .disclosed_value(SLOT_PATIENT_ID)
        .map(hex::encode)
        .ok_or(ActorError::Credential(CredentialError::CredentialProofRejected))
}

impl World {
    /// E1: identity proofing and patient credential issuance.
    pub fn e1_patient_credential(&self, p: &mut Patient) -> Result<(), ActorError> {
        let scope = p.next_scope("e1");
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut ac) = self.connect(&p.id, &self.apc.id, &scope)?;
        self.present_lvc(&mut ac, &mut pc, &self.apc.lvc, Role::APC)?;
        let req = EnrollRequest {
            did_patient: p.id.did.clone(),
            pii: p.pii.clone(),
            biohash: self.bio.enroll(&p.features)?,
        };
        let req: EnrollRequest = transfer(&mut pc, &mut ac, "e1/enroll", &req)?;
        if req.did_patient != ac.peer_did() {
            return Err(ActorError::State("enrolment DID differs from channel peer"));
        }
        let now = self.now();
        let cred = {
            let mut store = self.apc.store.lock().expect("lock");
            pcred::pcred_issue(
                &req.pii,
                &req.did_patient,
                &req.biohash,
                &self.apc.id.did,
                &self.apc.cl,
                &mut store,
                now,
                &mut irng,
            )?
        };
        let record = AuditRecord::draft(
            now,
            OriginModule::APC,
            EventType::PatientCredentialIssuance,
            AccessLevel::AuditorAuthorityAccessible,
            hex::encode(&cred.patient_id),
        )
        .detail("credentialId", hex::encode(cred.credential_id));
        self.log(&self.apc.id, record, &mut irng)?;
        let cred: PatientCredential = transfer(&mut ac, &mut pc, "e1/credential", &cred)?;
        if !pcred::pcred_verify(&cred, &self.apc_cl_public()?) {
            return Err(ActorError::BadArtifact("patient credential"));
        }
        p.wallet.pcred = Some(cred);
        Ok(())
    }

    /// E2: pseudonym generation and pseudonym token issuance. Generates a
    /// fresh re-encryption key pair when `fresh_keys` is set or none exists.
    pub fn e2_pseudonym_token(&self, p: &mut Patient, fresh_keys: bool) -> Result<(), ActorError> {
        let scope = p.next_scope("e2");
        let mut prng = self.rng(&format!("{scope}/patient"));
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut tc) = self.connect(&p.id, &self.pta.id, &scope)?;
        self.present_lvc(&mut tc, &mut pc, &self.pta.lvc, Role::PTA)?;
        let challenge: Challenge = transfer(&mut tc, &mut pc, "e2/nonce", &Challenge { nonce: nonce(&mut irng) })?;

        let cl_pk = self.apc_cl_public()?;
        let cred = credential(p)?;
        let keys = match (&p.wallet.pre_keys, fresh_keys) {
            (Some(k), false) => k.clone(),
            _ => PrePatientKeys::generate(&mut prng),
        };
        let (pai, witness) = pre::pseudonym_generate(&cred.patient_id, &keys, &self.hrr_public()?, &mut prng);
        let binding = pbp::prove(&pai.pseudonym, &witness.r, &witness.h, keys.public(), self.config.pbp_mode, &mut prng);
        let context = proof_context("e2", &self.pta.id.did, &challenge.nonce);
        let req = PtIssueRequest {
            pok: prove(cred, &cl_pk, &[SLOT_PATIENT_ID], &context, &mut prng)?,
            pseudonym: pai.pseudonym.clone(),
            pk_patient: *keys.public(),
            pbp: binding,
        };
        let req: PtIssueRequest = transfer(&mut pc, &mut tc, "e2/request", &req)?;

        let issuer_context = proof_context("e2", &self.pta.id.did, &challenge.nonce);
        let (token, _) = {
            let mut store = self.pta.store.lock().expect("lock");
            pt::pt_issue(
                &PtRequest {
                    pok: &req.pok,
                    pok_context: &issuer_context,
                    pseudonym: &req.pseudonym,
                    pk_patient: &req.pk_patient,
                    pbp: &req.pbp,
                },
                &self.apc_cl_public()?,
                self.config.pbp_mode,
                self.group,
                &self.pta.key,
                &mut store,
                &mut irng,
            )?
        };
        let record = AuditRecord::draft(
            self.now(),
            OriginModule::PTA,
            EventType::PseudonymTokenIssuance,
            AccessLevel::AuditorAuthorityAccessible,
            req.pseudonym.to_hex(),
        )
        .detail("pti", hex::encode(token.pti));
        self.log(&self.pta.id, record, &mut irng)?;

        let token: PseudonymToken = transfer(&mut tc, &mut pc, "e2/token", &token)?;
        if token.pseudonym != pai.pseudonym || !pt::pt_verify(self.group, &token, &self.pta_public()?) {
            return Err(ActorError::BadArtifact("pseudonym token"));
        }
        p.wallet.pre_keys = Some(keys);
        p.wallet.pai = Some(pai);
        p.wallet.witness = Some(witness);
        p.wallet.pt = Some(token);
        p.wallet.sk_p = None;
        Ok(())
    }

    /// E3: blind extraction of the identity-based signing key for the
    /// current pseudonym.
    pub fn e3_pseudonym_key(&self, p: &mut Patient) -> Result<(), ActorError> {
        let scope = p.next_scope("e3");
        let mut prng = self.rng(&format!("{scope}/patient"));
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut ac) = self.connect(&p.id, &self.apc.id, &scope)?;
        self.present_lvc(&mut ac, &mut pc, &self.apc.lvc, Role::APC)?;
        let challenge: Challenge = transfer(&mut ac, &mut pc, "e3/nonce", &Challenge { nonce: nonce(&mut irng) })?;

        let pseudonym = p.pseudonym().ok_or(ActorError::State("patient holds no pseudonym"))?.clone();
        let context = proof_context("e3", &self.apc.id.did, &challenge.nonce);
        let proof = prove(credential(p)?, &self.apc_cl_public()?, &[SLOT_PATIENT_ID], &context, &mut prng)?;
        let extraction = BlindExtraction::start(&pseudonym.to_bytes(), &mut prng);
        let req = KeyRequest {
            pok: proof,
            blinded: *extraction.request(),
        };
        let req: KeyRequest = transfer(&mut pc, &mut ac, "e3/request", &req)?;

        if !pok::verify(&req.pok, &self.apc_cl_public()?, &context) {
            return Err(CredentialError::CredentialProofRejected.into());
        }
        let patient_id = disclosed_patient_id(&req.pok)?;
        let key = self.apc.ibs.extract_blinded(&req.blinded)?;
        let record = AuditRecord::draft(
            self.now(),
            OriginModule::APC,
            EventType::PseudonymKeyIssuance,
            AccessLevel::AuditorAuthorityAccessible,
            patient_id,
        );
        self.log(&self.apc.id, record, &mut irng)?;

        let resp: KeyResponse = transfer(&mut ac, &mut pc, "e3/key", &KeyResponse { key })?;
        let sk = extraction
            .finish(&resp.key, &self.apc_ibs_public()?)
            .map_err(|_| ActorError::BadArtifact("pseudonym key"))?;
        p.wallet.pseudonym_keys.push((pseudonym, sk.clone()));
        p.wallet.sk_p = Some(sk);
        Ok(())
    }

    /// E4: partially blind appointment token issuance.
    pub fn e4_appointment_token(&self, p: &mut Patient) -> Result<(), ActorError> {
        let scope = p.next_scope("e4");
        let mut prng = self.rng(&format!("{scope}/patient"));
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut ac) = self.connect(&p.id, &self.apc.id, &scope)?;
        self.present_lvc(&mut ac, &mut pc, &self.apc.lvc, Role::APC)?;
        let challenge: Challenge = transfer(&mut ac, &mut pc, "e4/nonce", &Challenge { nonce: nonce(&mut irng) })?;

        let context = proof_context("e4", &self.apc.id.did, &challenge.nonce);
        let proof = prove(credential(p)?, &self.apc_cl_public()?, &[SLOT_PATIENT_ID], &context, &mut prng)?;
        let req: TokenRequest = transfer(&mut pc, &mut ac, "e4/request", &TokenRequest { pok: proof })?;

        let now = self.now();
        let (signer, exp) = at::at_signer_start(
            &req.pok,
            &context,
            &self.apc_cl_public()?,
            self.group,
            &self.apc.token_key,
            now,
            &self.config.at_policy(),
            &mut irng,
        )?;
        let patient_id = disclosed_patient_id(&req.pok)?;
        let commit = TokenCommitment {
            commitment: signer.commitment().clone(),
            exp,
        };
        let commit: TokenCommitment = transfer(&mut ac, &mut pc, "e4/commitment", &commit)?;

        let apc_pk = self.apc_token_public()?;
        let (user, ati, cu) = at::at_user_blind(self.group, &apc_pk, commit.exp, &commit.commitment, &mut prng)?;
        let cu: TokenScalar = transfer(&mut pc, &mut ac, "e4/challenge", &TokenScalar { value: cu })?;

        let (response, _) = signer.respond(&cu.value);
        let record = AuditRecord::draft(
            now,
            OriginModule::APC,
            EventType::AppointmentTokenIssuance,
            AccessLevel::AuditorAuthorityAccessible,
            patient_id,
        )
        .detail("exp", exp.to_string());
        self.log(&self.apc.id, record, &mut irng)?;
        let response: TokenScalar = transfer(&mut ac, &mut pc, "e4/response", &TokenScalar { value: response })?;

        let token = at::at_user_finish(user, ati, commit.exp, &cu.value, &response.value)?;
        if !at::at_verify_sig(self.group, &token, &apc_pk) {
            return Err(ActorError::BadArtifact("appointment token"));
        }
        p.wallet.at = Some(token);
        Ok(())
    }

    /// E5: booking at organization `ho`. Returns the confirmation code.
    pub fn e5_book(&self, p: &mut Patient, ho: usize) -> Result<String, ActorError> {
        let pai = p.wallet.pai.clone().ok_or(ActorError::State("patient holds no pseudonym"))?;
        let token = p.wallet.at.clone().ok_or(ActorError::State("patient holds no appointment token"))?;
        let sk = p.wallet.sk_p.clone().ok_or(ActorError::State("patient holds no pseudonym key"))?;
        let scope = p.next_scope("e5");
        let mut prng = self.rng(&format!("{scope}/patient"));
        let schedule = format!("slot-{:04}", prng.gen_range(0..10_000));
        let sig = ibs::sign(&booking_message(&pai, &token, &schedule), &sk, &mut prng);
        self.e5_submit(
            &p.id,
            ho,
            &scope,
            AppointmentRequest {
                pai,
                at: token,
                schedule,
                sig,
            },
        )
        .inspect(|code| p.wallet.booking = Some((ho, code.clone())))
    }

    /// The organization's side of E5 for an arbitrary request.
    pub fn e5_submit(
        &self,
        patient: &super::Identity,
        ho: usize,
        scope: &str,
        req: AppointmentRequest,
    ) -> Result<String, ActorError> {
        let org = self.hos.get(ho).ok_or(ActorError::State("no such organization"))?;
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut hc) = self.connect(patient, &org.id, scope)?;
        self.present_lvc(&mut hc, &mut pc, &org.lvc, Role::HO)?;
        let req: AppointmentRequest = transfer(&mut pc, &mut hc, "e5/request", &req)?;

        let msg = booking_message(&req.pai, &req.at, &req.schedule);
        if !ibs::verify(&msg, &req.sig, &req.pai.pseudonym.to_bytes(), &self.apc_ibs_public()?) {
            return Err(ActorError::NotBoundToPseudonym);
        }
        let now = self.now();
        match at::at_check(self.group, &req.at, now, &self.apc_token_public()?, &self.config.at_policy()) {
            AtStatus::Valid => {}
            AtStatus::Expired => return Err(ActorError::TokenExpired),
            AtStatus::BadSignature => return Err(ActorError::BadAppointmentToken),
        }
        if self.ati.check_and_mark(&req.at.ati) == AtiStatus::Replayed {
            return Err(ActorError::ReplayRejected);
        }
        if !pre::rk_check(&req.pai.rk, &req.pai.pk_patient, &self.hrr_public()?) {
            return Err(ActorError::MalformedPai);
        }
        let code = hex::encode(nonce(&mut irng));
        let pseudonym = req.pai.pseudonym.to_hex();
        org.bookings.lock().expect("lock").push(Booking {
            pseudonym: pseudonym.clone(),
            pai: req.pai.clone(),
            ati: hex::encode(req.at.ati),
            exp: req.at.exp,
            confirmation: code.clone(),
            schedule: req.schedule.clone(),
            verified: false,
        });
        let record = AuditRecord::draft(
            now,
            OriginModule::HO,
            EventType::AppointmentBooked,
            AccessLevel::PatientAccessible,
            pseudonym,
        )
        .detail("schedule", req.schedule.clone())
        .detail("confirmationCode", code.clone());
        self.log(&org.id, record, &mut irng)?;
        let conf: Confirmation = transfer(&mut hc, &mut pc, "e5/confirmation", &Confirmation { code })?;
        Ok(conf.code)
    }

    /// E6: in-person verification against the booking. `live` is the
    /// biometric sample the organization captures.
    pub fn e6_verify_identity(&self, p: &mut Patient, live: &[f64]) -> Result<(), ActorError> {
        let (ho, code) = p.wallet.booking.clone().ok_or(ActorError::State("patient holds no booking"))?;
        let org = self.hos.get(ho).ok_or(ActorError::State("no such organization"))?;
        let scope = p.next_scope("e6");
        let mut prng = self.rng(&format!("{scope}/patient"));
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut pc, mut hc) = self.connect(&p.id, &org.id, &scope)?;
        if self.config.reverify_lvc {
            self.present_lvc(&mut hc, &mut pc, &org.lvc, Role::HO)?;
        }
        let challenge: Challenge = transfer(&mut hc, &mut pc, "e6/nonce", &Challenge { nonce: nonce(&mut irng) })?;

        let context = proof_context("e6", &org.id.did, &challenge.nonce);
        let sk = p.wallet.sk_p.as_ref().ok_or(ActorError::State("patient holds no pseudonym key"))?;
        let req = VerificationRequest {
            pseudonym: p.pseudonym().ok_or(ActorError::State("patient holds no pseudonym"))?.clone(),
            confirmation: code.clone(),
            pok: prove(credential(p)?, &self.apc_cl_public()?, &[SLOT_BIOHASH], &context, &mut prng)?,
            pt: p.wallet.pt.clone().ok_or(ActorError::State("patient holds no pseudonym token"))?,
            sig: ibs::sign(&verification_message(&code, &challenge.nonce, &org.id.did), sk, &mut prng),
        };
        let req: VerificationRequest = transfer(&mut pc, &mut hc, "e6/request", &req)?;

        let pseudonym = req.pseudonym.to_hex();
        let booked = org
            .bookings
            .lock()
            .expect("lock")
            .iter()
            .any(|b| b.pseudonym == pseudonym && b.confirmation == req.confirmation);
        if !booked {
            return Err(ActorError::UnknownConfirmation);
        }
        let msg = verification_message(&req.confirmation, &challenge.nonce, &org.id.did);
        if !ibs::verify(&msg, &req.sig, &req.pseudonym.to_bytes(), &self.apc_ibs_public()?) {
            return Err(ActorError::NotBoundToPseudonym);
        }
        if !pok::verify(&req.pok, &self.apc_cl_public()?, &context) {
            return Err(CredentialError::CredentialProofRejected.into());
        }
        let enrolled: BioHash = req
            .pok
            .disclosed_value(SLOT_BIOHASH)
            .and_then(|v| v.try_into().ok())
            .ok_or(ActorError::Credential(CredentialError::CredentialProofRejected))?;
        let biometric_ok = self.bio.matches(&enrolled, live);
        let token_ok = req.pt.pseudonym == req.pseudonym && pt::pt_verify(self.group, &req.pt, &self.pta_public()?);
        let outcome = match (biometric_ok, token_ok) {
            (false, _) => "biometric-mismatch",
            (true, false) => "token-rejected",
            (true, true) => "verified",
        };
        let record = AuditRecord::draft(
            self.now(),
            OriginModule::HO,
            EventType::IdentityVerification,
            AccessLevel::PatientAccessible,
            pseudonym.clone(),
        )
        .detail("confirmationCode", req.confirmation.clone())
        .detail("outcome", outcome);
        self.log(&org.id, record, &mut irng)?;
        if !biometric_ok {
            return Err(ActorError::BiometricMismatch);
        }
        if !token_ok {
            return Err(ActorError::BadPseudonymToken);
        }
        for b in org.bookings.lock().expect("lock").iter_mut() {
            if b.pseudonym == pseudonym && b.confirmation == req.confirmation {
                b.verified = true;
            }
        }
        transfer(&mut hc, &mut pc, "e6/result", &VerificationResult { verified: true })?;
        Ok(())
    }

    /// E7: the organization hands the verified booking's access
    /// information to professional `hp`.
    pub fn e7_consult(&self, ho: usize, hp: usize, pseudonym: &str, scope: &str) -> Result<Pai, ActorError> {
        let org = self.hos.get(ho).ok_or(ActorError::State("no such organization"))?;
        let prof = self.hps.get(hp).ok_or(ActorError::State("no such professional"))?;
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut oc, mut hc) = self.connect(&org.id, &prof.id, scope)?;
        self.present_lvc(&mut oc, &mut hc, &org.lvc, Role::HO)?;
        self.present_lvc(&mut hc, &mut oc, &prof.lvc, Role::HP)?;
        let pai = org
            .bookings
            .lock()
            .expect("lock")
            .iter()
            .rev()
            .find(|b| b.pseudonym == pseudonym && b.verified)
            .map(|b| b.pai.clone())
            .ok_or(ActorError::State("no verified booking for pseudonym"))?;
        let record = AuditRecord::draft(
            self.now(),
            OriginModule::HO,
            EventType::ConsultationAuthorized,
            AccessLevel::PatientAccessible,
            pseudonym.to_string(),
        )
        .with_hp(&prof.id.did);
        self.log(&org.id, record, &mut irng)?;
        let handoff: Handoff = transfer(&mut oc, &mut hc, "e7/handoff", &Handoff { pai })?;
        Ok(handoff.pai)
    }

    /// E8: professional `hp` reads or appends the record behind `pai`.
    pub fn e8_access(&self, hp: usize, pai: &Pai, access: AccessType, scope: &str) -> Result<RecordView, ActorError> {
        let prof = self.hps.get(hp).ok_or(ActorError::State("no such professional"))?;
        let mut hrng = self.rng(&format!("{scope}/hp"));
        let p_hrr = pre::transform_to_hrr(pai, &self.hrr_public()?).map_err(|_| ActorError::MalformedPai)?;
        let body = AccessBody {
            hp_lvc: prof.lvc.clone(),
            access,
            p_hrr,
            ct: pai.ct.clone(),
            pseudonym: pai.pseudonym.to_hex(),
            timestamp: self.now(),
        };
        let sig = prof.id.sign(&body.signing_bytes(), &mut hrng);
        self.e8_submit(&prof.id, AccessRequest { body, sig }, scope)
    }

    /// The repository's side of E8 for an arbitrary request from `hp`.
    pub fn e8_submit(&self, hp: &super::Identity, req: AccessRequest, scope: &str) -> Result<RecordView, ActorError> {
        let mut irng = self.rng(&format!("{scope}/issuer"));
        let (mut hc, mut rc) = self.connect(hp, &self.hrr.id, scope)?;
        self.present_lvc(&mut rc, &mut hc, &self.hrr.lvc, Role::HRR)?;
        let req: AccessRequest = transfer(&mut hc, &mut rc, "e8/request", &req)?;

        let body = &req.body;
        let presenter = rc.peer_did().to_string();
        let authorized = lvc::verify(&body.hp_lvc, Role::HP, &presenter, &self.dids, &self.gha.id.did)
            && body.hp_lvc.allows(body.access.scope_name())
            && self
                .dids
                .resolve(&presenter)
                .active()
                .and_then(|d| d.authentication_key(self.group))
                .is_some_and(|y| schnorr::verify(self.group, &body.signing_bytes(), &req.sig, &y));
        if !authorized {
            return Err(ActorError::InsufficientAuthorization);
        }
        let patient_id = pre::hrr_recover(&body.p_hrr, &body.ct, &self.hrr.keys, &SYSTEM_SALT)
            .map_err(|_| ActorError::RecordReferenceInvalid)?;
        let key = hex::encode(patient_id);
        let now = self.now();
        let (event, entries) = {
            let mut records = self.hrr.records.lock().expect("lock");
            let entries = records.entry(key).or_default();
            match &body.access {
                AccessType::Read => (EventType::HealthRecordRead, entries.clone()),
                AccessType::Write { entry_type, content } => {
                    entries.push(HealthEntry {
                        timestamp: now,
                        hp: presenter.clone(),
                        entry_type: *entry_type,
                        content: content.clone(),
                    });
                    (EventType::HealthRecordWrite, vec![])
                }
            }
        };
        for (event, level) in [
            (event, AccessLevel::PatientAccessible),
            (EventType::HealthRecordAccess, AccessLevel::AuditorAuthorityAccessible),
        ] {
            let record = AuditRecord::draft(now, OriginModule::HRR, event, level, body.pseudonym.clone())
                .with_hp(&presenter)
                .detail("accessType", body.access.scope_name());
            self.log(&self.hrr.id, record, &mut irng)?;
        }
        Ok(transfer(&mut rc, &mut hc, "e8/response", &RecordView { entries })?)
    }

    /// One full visit. With rotation off, an existing pseudonym, token and
    /// key are reused instead of re-running E2 and E3.
    pub fn run_visit(&self, p: &mut Patient, visit: u32) -> Result<VisitOutcome, EpisodeFailure> {
        let fail = |episode| move |error| EpisodeFailure { episode, error };
        let ho = (p.index + visit as usize) % self.hos.len();
        let mut issuance = 0;

        self.e1_patient_credential(p).map_err(fail(Episode::E1))?;
        issuance += 1;
        let rotate = self.config.rotation || p.wallet.pt.is_none() || p.wallet.sk_p.is_none();
        if rotate {
            self.e2_pseudonym_token(p, self.config.rotation).map_err(fail(Episode::E2))?;
            self.e3_pseudonym_key(p).map_err(fail(Episode::E3))?;
            issuance += 2;
        }
        self.e4_appointment_token(p).map_err(fail(Episode::E4))?;
        issuance += 1;
        self.e5_book(p, ho).map_err(fail(Episode::E5))?;

        let live = {
            let mut rng = self.rng(&p.next_scope("capture"));
            add_noise(&p.features, self.config.biometric_noise, &mut rng)
        };
        self.e6_verify_identity(p, &live).map_err(fail(Episode::E6))?;

        let pseudonym = p.pseudonym().map(Pseudonym::to_hex).unwrap_or_default();
        let hp = 2 * ho;
        let pai = self
            .e7_consult(ho, hp, &pseudonym, &p.next_scope("e7"))
            .map_err(fail(Episode::E7))?;

        let read = self
            .e8_access(hp, &pai, AccessType::Read, &p.next_scope("e8-read"))
            .map_err(fail(Episode::E8))?;
        let written = HealthEntry {
            timestamp: self.now(),
            hp: self.hps[hp].id.did.clone(),
            entry_type: EntryType::Note,
            content: format!("visit {visit} at organization {ho}"),
        };
        let access = AccessType::Write {
            entry_type: written.entry_type,
            content: written.content.clone(),
        };
        self.e8_access(hp, &pai, access, &p.next_scope("e8-write"))
            .map_err(fail(Episode::E8))?;
        Ok(VisitOutcome {
            visit,
            ho,
            pseudonym,
            read: read.entries,
            written,
            issuance_events: issuance,
            access_events: 2,
        })
    }
}
