//! Pseudonyms, re-encryption and the two zero-knowledge proofs.

use hidm_core::algebra::{derive_rng, hash_to_g1, PairingContext, Scalar};
use hidm_core::pre::{hrr_recover, patient_id_hash, pseudonym_generate, rk_check, transform_to_hrr, PreError, PreHrrKeys, PrePatientKeys, SYSTEM_SALT};
use hidm_core::proofs::{pbp, pok, PbpMode};
use hidm_core::signatures::{ClKeypair, ClVariant};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Fresh randomness per call: unlinkable components, same recovered id.
    #[test]
    fn repeated_generation_unlinks_but_recovers(seed in any::<u64>(), id in prop::collection::vec(any::<u8>(), 16)) {
        let mut rng = derive_rng(seed, "pre");
        let patient = PrePatientKeys::generate(&mut rng);
        let hrr = PreHrrKeys::generate(&mut rng);
        let (a, _) = pseudonym_generate(&id, &patient, hrr.public(), &mut rng);
        let (b, _) = pseudonym_generate(&id, &patient, hrr.public(), &mut rng);
        prop_assert_ne!(a.pseudonym.p1, b.pseudonym.p1);
        prop_assert_ne!(a.pseudonym.p2, b.pseudonym.p2);
        for pai in [&a, &b] {
            let hp = transform_to_hrr(pai, hrr.public()).unwrap();
            prop_assert_eq!(hrr_recover(&hp, &pai.ct, &hrr, &SYSTEM_SALT).unwrap(), id.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Every single-field change to an honest proof is rejected in both modes.
    #[test]
    fn pbp_rejects_every_field_mutation(seed in any::<u64>(), field in 0usize..7, strict in any::<bool>()) {
        let ctx = PairingContext::global();
        let mode = if strict { PbpMode::Strict } else { PbpMode::AsWritten };
        let mut rng = derive_rng(seed, "pbp");
        let keys = PrePatientKeys::generate(&mut rng);
        let hrr = PreHrrKeys::generate(&mut rng);
        let (pai, w) = pseudonym_generate(b"patient", &keys, hrr.public(), &mut rng);
        let honest = pbp::prove(&pai.pseudonym, &w.r, &w.h, keys.public(), mode, &mut rng);
        prop_assert!(pbp::verify(&pai.pseudonym, &honest, keys.public(), &w.h, mode));

        let one = Scalar::from(1u64);
        let (mut proof, mut ps, mut h) = (honest, pai.pseudonym.clone(), w.h);
        match field {
            0 => proof.t1 += ctx.z_pow(&one),
            1 => proof.t2 += ctx.g2,
            2 => proof.c += one,
            3 => proof.s1 += one,
            4 => proof.s2 += one,
            5 => ps.p1 += ctx.z_pow(&one),
            _ => h = patient_id_hash(b"another patient"),
        }
        prop_assert!(!pbp::verify(&ps, &proof, keys.public(), &h, mode));
    }
}

#[test]
fn random_reencryption_keys_are_rejected() {
    let mut rng = derive_rng(5, "rk");
    let patient = PrePatientKeys::generate(&mut rng);
    let hrr = PreHrrKeys::generate(&mut rng);
    let (pai, _) = pseudonym_generate(b"id", &patient, hrr.public(), &mut rng);
    assert!(rk_check(&pai.rk, patient.public(), hrr.public()));
    for i in 0u32..1000 {
        let fake = hash_to_g1(b"HIDM/test-rk", &i.to_be_bytes());
        assert!(!rk_check(&fake, patient.public(), hrr.public()));
        let mut forged = pai.clone();
        forged.rk = fake;
        assert_eq!(transform_to_hrr(&forged, hrr.public()), Err(PreError::InvalidReKey));
    }
}

#[test]
fn ciphertexts_do_not_cross_between_patients() {
    let mut rng = derive_rng(6, "cross");
    let hrr = PreHrrKeys::generate(&mut rng);
    let pais: Vec<_> = (0u8..10)
        .map(|i| pseudonym_generate(&[i; 16], &PrePatientKeys::generate(&mut rng), hrr.public(), &mut rng).0)
        .collect();
    for (i, a) in pais.iter().enumerate() {
        for (j, b) in pais.iter().enumerate() {
            let hp = transform_to_hrr(b, hrr.public()).unwrap();
            let got = hrr_recover(&hp, &a.ct, &hrr, &SYSTEM_SALT);
            if i == j {
                assert_eq!(got.unwrap(), vec![i as u8; 16]);
            } else {
                assert_eq!(got, Err(PreError::Mismatch));
            }
        }
    }
}

#[test]
fn pok_binds_context_issuer_and_disclosed_values() {
    let mut rng = derive_rng(7, "pok");
    let attrs: Vec<Vec<u8>> = (0u8..6).map(|i| vec![i; 8]).collect();
    for variant in [ClVariant::Pairing, ClVariant::Rsa] {
        let issuer = ClKeypair::generate(variant, 6, &mut rng);
        let stranger = ClKeypair::generate(variant, 6, &mut rng);
        let sig = issuer.sign(&attrs, &mut rng).unwrap();
        for disclose in [vec![], vec![2], vec![2, 4], vec![0, 1, 2, 3, 4, 5]] {
            let proof = pok::prove(&attrs, &sig, &issuer.public(), &disclose, b"ctx", &mut rng).unwrap();
            assert!(pok::verify(&proof, &issuer.public(), b"ctx"));
            assert!(!pok::verify(&proof, &issuer.public(), b"ctx2"), "context replay");
            assert!(!pok::verify(&proof, &stranger.public(), b"ctx"), "cross issuer");
            if let Some(first) = proof.disclosed.first() {
                let mut altered = proof.clone();
                altered.disclosed[0].value = [first.value.as_slice(), b"!"].concat();
                assert!(!pok::verify(&altered, &issuer.public(), b"ctx"));
                let mut hidden = proof.clone();
                hidden.disclosed.remove(0);
                assert!(!pok::verify(&hidden, &issuer.public(), b"ctx"));
            }
        }
    }
}
