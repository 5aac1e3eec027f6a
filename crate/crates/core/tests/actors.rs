//! End-to-end behaviour of the episode engine on small worlds.

use hidm_core::actors::channel::{establish, transfer, ChannelError};
use hidm_core::actors::{
    booking_message, AccessType, EntryType, ActorError, AppointmentRequest, Identity, Patient, Role, ScenarioConfig, World,
};
use hidm_core::algebra::{seeded_rng, PairingContext};
use hidm_core::credentials::biohash::add_noise;
use hidm_core::ledgers::{AccessLevel, AuditFilter, EventType};
use hidm_core::signatures::ibs;

fn world(patients: usize, visits: u32, seed: u64) -> World {
    World::new(ScenarioConfig {
        patients,
        visits,
        seed: Some(seed),
        ..Default::default()
    })
    .unwrap()
}

/// Patient `i` holding a credential, pseudonym, key and appointment token.
fn ready(w: &World, i: usize) -> Patient {
    let mut p = w.new_patient(i).unwrap();
    w.e1_patient_credential(&mut p).unwrap();
    w.e2_pseudonym_token(&mut p, true).unwrap();
    w.e3_pseudonym_key(&mut p).unwrap();
    w.e4_appointment_token(&mut p).unwrap();
    p
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

#[test]
fn two_visits_carry_the_record_forward() {
    let w = world(3, 2, 10);
    let (_, report) = w.run().unwrap();
    assert!(report.failures().is_empty(), "{:?}", report.failures());
    for p in &report.patients {
        assert_eq!(p.visits.len(), 2);
        assert!(p.visits[0].read.is_empty());
        assert_eq!(p.visits[1].read, vec![p.visits[0].written.clone()]);
        assert_ne!(p.visits[0].pseudonym, p.visits[1].pseudonym);
    }
    assert!(w.dids.chain_ok() && w.ati.chain_ok() && w.audit.chain_ok());
    assert_eq!(w.hrr.record_count(), 6);
}

#[test]
fn same_seed_same_transcript() {
    let run = |seed| {
        let w = world(2, 1, seed);
        w.run().unwrap();
        w.wire.frames()
    };
    let a = run(77);
    assert_eq!(a, run(77));
    assert_ne!(a, run(78));
}

#[test]
fn concurrent_workers_complete_every_visit() {
    let w = World::new(ScenarioConfig {
        patients: 4,
        visits: 1,
        seed: Some(11),
        concurrency: 4,
        ..Default::default()
    })
    .unwrap();
    let (_, report) = w.run().unwrap();
    assert!(report.failures().is_empty());
    assert_eq!(report.completed_visits(), 4);
    assert!(w.audit.chain_ok() && w.ati.chain_ok());
}

#[test]
fn replayed_token_is_rejected() {
    let w = world(1, 1, 12);
    let mut p = ready(&w, 0);
    w.e5_book(&mut p, 0).unwrap();
    let err = w.e5_book(&mut p, 1).unwrap_err();
    assert_eq!(err, ActorError::ReplayRejected);
    assert_eq!(err.to_string(), "replay rejected");
}

#[test]
fn token_expiry_honours_skew() {
    let w = world(1, 1, 13);
    let policy = w.config.at_policy();
    let mut on_time = ready(&w, 0);
    let mut late = ready(&w, 1);
    w.clock.advance(policy.validity_secs + policy.clock_skew_secs);
    w.e5_book(&mut on_time, 0).unwrap();
    w.clock.advance(1);
    let err = w.e5_book(&mut late, 0).unwrap_err();
    assert_eq!(err, ActorError::TokenExpired);
    assert_eq!(err.to_string(), "token expired");
}

#[test]
fn booking_with_another_patients_pseudonym_is_refused() {
    let w = world(2, 1, 14);
    let a = ready(&w, 0);
    let b = ready(&w, 1);
    let pai = b.wallet.pai.clone().unwrap();
    let at = a.wallet.at.clone().unwrap();
    let sig = ibs::sign(&booking_message(&pai, &at, "slot-1"), a.wallet.sk_p.as_ref().unwrap(), &mut seeded_rng(1));
    let req = AppointmentRequest {
        pai,
        at,
        schedule: "slot-1".into(),
        sig,
    };
    let err = w.e5_submit(&a.id, 0, "forged-ibs", req).unwrap_err();
    assert_eq!(err.to_string(), "requester not bound to pseudonym");
}

#[test]
fn malformed_access_information_is_refused() {
    let w = world(1, 1, 15);
    let p = ready(&w, 0);
    let mut pai = p.wallet.pai.clone().unwrap();
    pai.rk += PairingContext::global().g1;
    let at = p.wallet.at.clone().unwrap();
    let sig = ibs::sign(&booking_message(&pai, &at, "slot-2"), p.wallet.sk_p.as_ref().unwrap(), &mut seeded_rng(2));
    let req = AppointmentRequest {
        pai,
        at,
        schedule: "slot-2".into(),
        sig,
    };
    let err = w.e5_submit(&p.id, 0, "bad-rk", req).unwrap_err();
    assert_eq!(err.to_string(), "malformed PAI");
}

#[test]
fn impostor_biometric_fails_verification() {
    let w = world(2, 1, 16);
    let mut p = ready(&w, 0);
    let other = w.new_patient(1).unwrap();
    w.e5_book(&mut p, 0).unwrap();
    let err = w.e6_verify_identity(&mut p, &other.features).unwrap_err();
    assert_eq!(err.to_string(), "biometric verification failed");
    // The genuine holder still verifies with a noisy sample.
    let live = add_noise(&p.features, 0.1, &mut seeded_rng(3));
    w.e6_verify_identity(&mut p, &live).unwrap();
}

#[test]
fn read_only_professional_cannot_write() {
    let w = world(1, 1, 17);
    let mut p = ready(&w, 0);
    w.e5_book(&mut p, 0).unwrap();
    let live = p.features.clone();
    w.e6_verify_identity(&mut p, &live).unwrap();
    let ps = p.pseudonym().unwrap().to_hex();
    let pai = w.e7_consult(0, 1, &ps, "consult-ro").unwrap();
    w.e8_access(1, &pai, AccessType::Read, "ro-read").unwrap();
    let write = AccessType::Write {
        entry_type: EntryType::Observation,
        content: "x".into(),
    };
    let err = w.e8_access(1, &pai, write.clone(), "ro-write").unwrap_err();
    assert_eq!(err.to_string(), "insufficient authorization");
    // A revoked professional loses even read access.
    w.e8_access(0, &pai, write, "rw-write").unwrap();
    w.revoke(&w.hps[0].id.did).unwrap();
    assert!(w.e8_access(0, &pai, AccessType::Read, "revoked-read").is_err());
}

#[test]
fn swapped_ciphertext_is_an_invalid_reference() {
    let w = world(2, 1, 18);
    let a = ready(&w, 0);
    let b = ready(&w, 1);
    let mut pai = a.wallet.pai.clone().unwrap();
    pai.ct = b.wallet.pai.as_ref().unwrap().ct.clone();
    let err = w.e8_access(0, &pai, AccessType::Read, "swap").unwrap_err();
    assert_eq!(err.to_string(), "record reference invalid");
}

#[test]
fn patients_refuse_illegitimate_organizations() {
    let mut w = world(2, 1, 19);
    let mut p = ready(&w, 0);
    // Registered DID, but presenting another organization's credential.
    let rogue = Identity::new(Role::HO, "did:hidm:ho:rogue", &mut seeded_rng(4));
    rogue.register(&w.dids, vec![], &mut seeded_rng(5)).unwrap();
    let stolen = w.hos[0].lvc.clone();
    w.hos.push(hidm_core::actors::entities::Ho::new(rogue, stolen));
    let rogue_index = w.hos.len() - 1;
    let err = w.e5_book(&mut p, rogue_index).unwrap_err();
    assert_eq!(err, ActorError::IllegitimatePeer(Role::HO));
    assert!(w.hos[rogue_index].bookings().is_empty());

    // A revoked organization cannot even open a channel.
    let mut q = ready(&w, 1);
    w.revoke(&w.hos[1].id.did).unwrap();
    assert!(matches!(w.e5_book(&mut q, 1), Err(ActorError::Channel(ChannelError::Refused(_)))));
}

#[test]
fn channel_rejects_stale_frames_and_unknown_dids() {
    let w = world(1, 1, 20);
    let p = w.new_patient(0).unwrap();
    let (mut a, mut b) = w.connect(&p.id, &w.apc.id, "chan-test").unwrap();
    let f0 = a.seal("m", b"first");
    assert_eq!(b.open(&f0).unwrap(), b"first");
    assert_eq!(b.open(&f0), Err(ChannelError::Replay { expected: 1, got: 0 }));
    let mut f1 = a.seal("m", b"second");
    f1.ciphertext[0] ^= 1;
    assert_eq!(b.open(&f1), Err(ChannelError::Decrypt));
    let v: String = transfer(&mut b, &mut a, "reply", &"ok".to_string()).unwrap();
    assert_eq!(v, "ok");

    let stranger = Identity::new(Role::Patient, "did:hidm:patient:unregistered", &mut seeded_rng(6));
    let err = establish(&stranger, &w.apc.id, &w.dids, &w.wire, &mut seeded_rng(7), &mut seeded_rng(8));
    assert!(matches!(err, Err(ChannelError::Refused(_))));
    // Same DID as a registered patient, different key.
    let imposter = Identity::new(Role::Patient, p.id.did.clone(), &mut seeded_rng(9));
    let err = establish(&imposter, &w.apc.id, &w.dids, &w.wire, &mut seeded_rng(10), &mut seeded_rng(11));
    assert_eq!(err.err(), Some(ChannelError::Refused("initiator failed key proof")));
}

#[test]
fn eavesdropper_and_organization_never_see_identifiers() {
    let w = world(3, 1, 21);
    let (patients, report) = w.run().unwrap();
    assert!(report.failures().is_empty());
    let captured = w.wire.captured_bytes();
    let delivered = w.wire.delivered();
    for p in &patients {
        let pid = p.patient_id().unwrap();
        let pid_hex = hex::encode(pid);
        assert!(!contains(&captured, pid) && !contains(&captured, pid_hex.as_bytes()));
        for s in p.pii.scan_strings() {
            assert!(!contains(&captured, s.as_bytes()), "PII visible on the wire");
        }
        let ati = p.wallet.at.as_ref().unwrap().ati;
        assert!(!contains(&captured, &ati) && !contains(&captured, hex::encode(ati).as_bytes()));
        for m in delivered.iter().filter(|m| matches!(m.to_role, Role::HO | Role::HP)) {
            assert!(!contains(&m.plaintext, pid_hex.as_bytes()) && !contains(&m.plaintext, pid));
        }
    }
}

#[test]
fn authorities_hold_disjoint_halves() {
    let w = world(2, 1, 22);
    let (patients, _) = w.run().unwrap();
    let apc = w.apc.store_json();
    let pta = w.pta.store_json();
    for p in &patients {
        for (ps, _) in &p.wallet.pseudonym_keys {
            assert!(!apc.contains(&ps.to_hex()));
        }
        for s in p.pii.scan_strings() {
            assert!(!pta.contains(s));
        }
    }
}

#[test]
fn rotation_unlinks_bookings_and_reuse_links_them() {
    for rotation in [true, false] {
        let w = World::new(ScenarioConfig {
            patients: 1,
            visits: 2,
            hos: 1,
            rotation,
            seed: Some(23),
            ..Default::default()
        })
        .unwrap();
        let (_, report) = w.run().unwrap();
        assert!(report.failures().is_empty());
        let bookings = w.hos[0].bookings();
        assert_eq!(bookings.len(), 2);
        let first = bookings[0].identifier_fields();
        let shared = bookings[1].identifier_fields().iter().filter(|f| first.contains(f)).count();
        if rotation {
            assert_eq!(shared, 0);
        } else {
            assert_eq!(bookings[0].pseudonym, bookings[1].pseudonym);
            assert_eq!(report.issuance_events(), 2 + 2 + 2);
        }
    }
}

#[test]
fn warrant_trace_logs_both_disclosures() {
    let w = world(1, 1, 24);
    let (patients, _) = w.run().unwrap();
    let target = patients[0].pseudonym().unwrap().to_hex();
    let before = w.audit.len();
    let warrant = w.issue_warrant(&target, "court order 1");
    assert_eq!(w.trace_identity(&warrant).unwrap(), patients[0].pii);
    assert_eq!(w.audit.len(), before + 2);

    let mut forged = warrant.clone();
    forged.sig = w.gha.rsa.sign(&forged.signing_bytes());
    assert_eq!(w.trace_identity(&forged), Err(ActorError::TraceRefused));
    let mut altered = warrant;
    altered.reason = "fishing".into();
    assert_eq!(w.trace_identity(&altered), Err(ActorError::TraceRefused));
    assert_eq!(w.audit.len(), before + 2);

    let nonce = w.audit_nonce("trace");
    let req = w.authority_audit_request(nonce, "eventType=TraceDisclosure");
    let records = w.authority_audit_query(&req).unwrap().records;
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.access_level == AccessLevel::AuditorAuthorityAccessible));
}

#[test]
fn audit_tiers_and_reconciliation() {
    let w = world(2, 2, 25);
    let (mut patients, report) = w.run().unwrap();

    let nonce = w.audit_nonce("p0");
    let req = w.patient_audit_request(&mut patients[0], nonce).unwrap();
    let own = w.patient_audit_query(&req, &AuditFilter::all()).unwrap().records;
    let mine: Vec<String> = patients[0].wallet.pseudonym_keys.iter().map(|(p, _)| p.to_hex()).collect();
    assert!(!own.is_empty());
    assert!(own.iter().all(|r| r.access_level == AccessLevel::PatientAccessible && mine.contains(&r.patient_identifier)));
    // E5, E6, E7 and read + write in E8, per visit.
    assert_eq!(own.len(), 2 * 5);
    assert!(w.patient_audit_query(&req, &AuditFilter::all()).is_err(), "nonce is single use");

    // Claiming someone else's pseudonym without their key yields nothing.
    let nonce = w.audit_nonce("p0-foreign");
    let mut req = w.patient_audit_request(&mut patients[0], nonce).unwrap();
    let foreign = patients[1].wallet.pseudonym_keys[0].0.clone();
    for o in &mut req.pseudonyms {
        o.pseudonym = foreign.clone();
    }
    assert!(w.patient_audit_query(&req, &AuditFilter::all()).unwrap().records.is_empty());

    let nonce = w.audit_nonce("authority");
    let req = w.authority_audit_request(nonce, "");
    let all = w.authority_audit_query(&req).unwrap().records;
    let issuance = all.iter().filter(|r| r.event_type.is_issuance()).count();
    let access = all.iter().filter(|r| r.event_type == EventType::HealthRecordAccess).count();
    assert_eq!(issuance, report.issuance_events());
    assert_eq!(access, report.access_events());
    assert_eq!(all.len(), issuance + access);

    let mut tampered = w.authority_audit_request(w.audit_nonce("bad"), "");
    tampered.filter = "eventType=HealthRecordAccess".into();
    assert_eq!(w.authority_audit_query(&tampered), Err(ActorError::InsufficientAuthorization));
    assert!(!w.audit.admin_metadata(w.admin_token()).is_empty());
}

#[test]
fn issuer_never_receives_the_appointment_token_identifier() {
    let w = world(1, 1, 26);
    let p = ready(&w, 0);
    let ati = hex::encode(p.wallet.at.as_ref().unwrap().ati);
    let to_apc: Vec<_> = w.wire.delivered().into_iter().filter(|m| m.to_role == Role::APC).collect();
    assert!(to_apc.iter().any(|m| m.label.starts_with("e4/")));
    assert!(to_apc.iter().all(|m| !contains(&m.plaintext, ati.as_bytes())));
}

#[test]
fn schedule_mutated_in_flight_breaks_the_binding() {
    let w = world(1, 1, 27);
    let p = ready(&w, 0);
    let pai = p.wallet.pai.clone().unwrap();
    let at = p.wallet.at.clone().unwrap();
    let sig = ibs::sign(&booking_message(&pai, &at, "slot-0001"), p.wallet.sk_p.as_ref().unwrap(), &mut seeded_rng(12));
    let req = AppointmentRequest {
        pai,
        at,
        schedule: "slot-9999".into(),
        sig,
    };
    assert_eq!(w.e5_submit(&p.id, 0, "mitm", req), Err(ActorError::NotBoundToPseudonym));
}

#[test]
fn token_signed_outside_the_pta_is_rejected() {
    use hidm_core::credentials::pt::signed_message;
    use hidm_core::signatures::{schnorr, SchnorrKeypair};
    let w = world(1, 1, 28);
    let mut p = ready(&w, 0);
    w.e5_book(&mut p, 0).unwrap();
    let rogue = SchnorrKeypair::generate(w.group, &mut seeded_rng(13));
    let pt = p.wallet.pt.as_mut().unwrap();
    pt.sig = schnorr::sign(w.group, &rogue, &signed_message(&pt.pti, &pt.pseudonym), &mut seeded_rng(14));
    let live = p.features.clone();
    assert_eq!(w.e6_verify_identity(&mut p, &live), Err(ActorError::BadPseudonymToken));
}

#[test]
fn lvc_checks_role_subject_and_signature() {
    use hidm_core::actors::lvc;
    let w = world(1, 1, 29);
    let gha = &w.gha.id.did;
    let apc = &w.apc.lvc;
    assert!(lvc::verify(apc, Role::APC, &w.apc.id.did, &w.dids, gha));
    assert!(!lvc::verify(&w.hos[0].lvc, Role::APC, &w.hos[0].id.did, &w.dids, gha));
    assert!(!lvc::verify(apc, Role::APC, &w.pta.id.did, &w.dids, gha));
    let mut rng = seeded_rng(15);
    for i in 0..1000 {
        let mut forged = apc.clone();
        if i % 2 == 0 {
            rand::RngCore::fill_bytes(&mut rng, &mut forged.sig.bytes);
        } else {
            let at = i % forged.sig.bytes.len();
            forged.sig.bytes[at] ^= 1 << (i % 8);
        }
        assert!(!lvc::verify(&forged, Role::APC, &w.apc.id.did, &w.dids, gha));
    }
}
