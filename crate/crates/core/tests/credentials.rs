//! Credential artifacts: biometric matching rates, token uniqueness and
//! expiry, credential serialization.

use hidm_core::algebra::{derive_rng, SchnorrGroup};
use hidm_core::clock::Timestamp;
use hidm_core::credentials::at::{self, AtPolicy, AtStatus};
use hidm_core::credentials::biohash::{add_noise, hamming};
use hidm_core::credentials::pcred::{pcred_issue, pcred_verify, pcred_verify_json};
use hidm_core::credentials::{ApcStore, BioHashParams, PatientCredential, PiiBundle};
use hidm_core::signatures::pbs::PbsSignerSession;
use hidm_core::signatures::{ClKeypair, ClVariant, SchnorrKeypair};
use proptest::prelude::*;
use std::collections::HashSet;

#[test]
fn genuine_samples_match_and_impostors_do_not() {
    let bio = BioHashParams::default();
    let mut rng = derive_rng(1, "biohash");
    let trials = 1000;
    let mut genuine = 0;
    let mut impostor = 0;
    for _ in 0..trials {
        let enrolled_features = bio.random_features(&mut rng);
        let enrolled = bio.enroll(&enrolled_features).unwrap();
        genuine += usize::from(bio.matches(&enrolled, &add_noise(&enrolled_features, 0.05, &mut rng)));
        impostor += usize::from(bio.matches(&enrolled, &bio.random_features(&mut rng)));
    }
    assert!(genuine * 100 >= trials * 99, "genuine acceptance {genuine}/{trials}");
    assert!(impostor * 1000 <= trials, "impostor acceptance {impostor}/{trials}");
}

#[test]
fn distances_grow_with_noise() {
    let bio = BioHashParams::default();
    let mut rng = derive_rng(2, "noise");
    let f = bio.random_features(&mut rng);
    let h = bio.enroll(&f).unwrap();
    let mean = |sigma: f64, rng: &mut _| -> f64 {
        (0..200).map(|_| hamming(&h, &bio.enroll(&add_noise(&f, sigma, rng)).unwrap()) as f64).sum::<f64>() / 200.0
    };
    let (small, large) = (mean(0.05, &mut rng), mean(0.5, &mut rng));
    assert!(small < large && small < bio.threshold as f64);
}

#[test]
fn appointment_tokens_are_unique_and_issuer_never_sees_them() {
    let group = SchnorrGroup::standard();
    let mut rng = derive_rng(3, "at");
    let key = SchnorrKeypair::generate(group, &mut rng);
    let now = Timestamp(1_767_225_600);
    let policy = AtPolicy::default();
    let exp = now.plus_secs(policy.validity_secs);
    let mut seen = HashSet::new();
    for _ in 0..1000 {
        let signer = PbsSignerSession::start(group, &key, &at::exp_info(exp), &mut rng);
        let (user, ati, cu) = at::at_user_blind(group, key.public(), exp, signer.commitment(), &mut rng).unwrap();
        let (response, transcript) = signer.respond(&cu);
        let token = at::at_user_finish(user, ati, exp, &cu, &response).unwrap();
        assert_eq!(uuid::Uuid::from_bytes(token.ati).get_version_num(), 4);
        assert!(seen.insert(token.ati), "duplicate ATI");
        let seen_by_issuer = serde_json::to_string(&transcript).unwrap();
        assert!(!seen_by_issuer.contains(&hex::encode(token.ati)));
        assert_eq!(at::at_check(group, &token, now, key.public(), &policy), AtStatus::Valid);
    }
}

#[test]
fn token_field_mutations_are_bad_signatures() {
    let group = SchnorrGroup::standard();
    let mut rng = derive_rng(4, "at-mut");
    let key = SchnorrKeypair::generate(group, &mut rng);
    let now = Timestamp(1_767_225_600);
    let exp = now.plus_secs(3600);
    let signer = PbsSignerSession::start(group, &key, &at::exp_info(exp), &mut rng);
    let (user, ati, cu) = at::at_user_blind(group, key.public(), exp, signer.commitment(), &mut rng).unwrap();
    let (response, _) = signer.respond(&cu);
    let token = at::at_user_finish(user, ati, exp, &cu, &response).unwrap();
    let policy = AtPolicy::default();
    for i in 0..16 {
        let mut t = token.clone();
        t.ati[i] ^= 1;
        assert_eq!(at::at_check(group, &t, now, key.public(), &policy), AtStatus::BadSignature);
        let mut t = token.clone();
        t.sig.t[i] ^= 1;
        assert_eq!(at::at_check(group, &t, now, key.public(), &policy), AtStatus::BadSignature);
    }
    let mut t = token.clone();
    t.exp = t.exp.plus_secs(1);
    assert_eq!(at::at_check(group, &t, now, key.public(), &policy), AtStatus::BadSignature);
    let mut t = token;
    t.sig.s += 1u32;
    assert_eq!(at::at_check(group, &t, now, key.public(), &policy), AtStatus::BadSignature);
}

fn pii_strategy() -> impl Strategy<Value = PiiBundle> {
    ("[A-Za-z][A-Za-z ]{0,30}", 1900u32..2025, 1u32..13, 1u32..29, "[A-Z0-9]{6,16}", ".{0,40}").prop_map(|(name, y, m, d, nid, addr)| PiiBundle {
        full_name: name,
        date_of_birth: format!("{y:04}-{m:02}-{d:02}"),
        national_id: nid,
        address: addr,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Issued credentials survive JSON and still verify; re-enrolment keeps
    /// the identifier and changes the credential id.
    #[test]
    fn credentials_round_trip_through_json(seed in any::<u64>(), pii in pii_strategy()) {
        let mut rng = derive_rng(seed, "pcred");
        let key = ClKeypair::generate(ClVariant::Pairing, 6, &mut rng);
        let bio = BioHashParams::default();
        let biohash = bio.enroll(&bio.random_features(&mut rng)).unwrap();
        let mut store = ApcStore::default();
        let now = Timestamp(1_767_225_600);
        let a = pcred_issue(&pii, "did:hidm:patient:x", &biohash, "did:hidm:apc", &key, &mut store, now, &mut rng).unwrap();
        let b = pcred_issue(&pii, "did:hidm:patient:x", &biohash, "did:hidm:apc", &key, &mut store, now, &mut rng).unwrap();
        prop_assert_eq!(&a.patient_id, &b.patient_id);
        prop_assert_ne!(a.credential_id, b.credential_id);
        let json = serde_json::to_string(&a).unwrap();
        prop_assert!(pcred_verify_json(&json, &key.public()));
        let back: PatientCredential = serde_json::from_str(&json).unwrap();
        prop_assert!(pcred_verify(&back, &key.public()));
        prop_assert!(!pcred_verify_json(&json.replacen("did:hidm:apc", "did:hidm:apx", 1), &key.public()));
    }
}
