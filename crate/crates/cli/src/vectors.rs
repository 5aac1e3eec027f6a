//! Deterministic test vectors. Every artifact type is produced from one
//! seed, so the same seed always yields byte-identical output.

use hidm_core::algebra::{derive_rng, Codec, SchnorrGroup};
use hidm_core::clock::Timestamp;
use hidm_core::credentials::at::{self, AtPolicy};
use hidm_core::credentials::pcred::{pcred_issue, SLOT_BIOHASH, SLOT_PATIENT_ID};
use hidm_core::credentials::pt::{pt_issue, PtRequest};
use hidm_core::credentials::{ApcStore, BioHashParams, PiiBundle, PtaStore};
use hidm_core::ledgers::HashChain;
use hidm_core::pre::{pseudonym_generate, transform_to_hrr, PreHrrKeys, PrePatientKeys};
use hidm_core::proofs::{pbp, pok, PbpMode};
use hidm_core::signatures::ibs::{self, BlindExtraction};
use hidm_core::signatures::rsa_sig::RsaKeypair;
use hidm_core::signatures::{pbs, schnorr, ClKeypair, ClVariant, IbsMasterKey, SchnorrKeypair};
use serde_json::{json, Value};

use crate::CliError;

const ISSUED_AT: Timestamp = Timestamp(1_767_225_600);

pub fn emit(seed: u64) -> Result<Value, CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Protocol(e.to_string());
    let mut rng = derive_rng(seed, "vectors");
    let group = SchnorrGroup::standard();

    let schnorr_key = SchnorrKeypair::generate(group, &mut rng);
    let schnorr_msg = b"hidm schnorr vector".to_vec();
    let schnorr_sig = schnorr::sign(group, &schnorr_key, &schnorr_msg, &mut rng);

    let pbs_key = SchnorrKeypair::generate(group, &mut rng);
    let mut signer_rng = derive_rng(seed, "vectors/pbs-signer");
    let (pbs_sig, pbs_transcript) =
        pbs::pbs_issue(group, &pbs_key, b"common info", b"hidden message", &mut rng, &mut signer_rng).map_err(|e| fail(&e))?;

    let rsa = RsaKeypair::reference(0);
    let rsa_sig = rsa.sign(b"hidm rsa vector");

    let pii = PiiBundle {
        full_name: "Vector Patient".into(),
        date_of_birth: "1975-06-15".into(),
        national_id: "NID000000000777".into(),
        address: "7 Vector Lane".into(),
    };
    let bio = BioHashParams::default();
    let features = bio.random_features(&mut rng);
    let biohash = bio.enroll(&features).map_err(|e| fail(&e))?;

    let mut credentials = serde_json::Map::new();
    let mut proofs = serde_json::Map::new();
    let mut cl_keys = serde_json::Map::new();
    let mut pairing_fixture = None;
    for (name, variant) in [("cl-rsa", ClVariant::Rsa), ("cl-pairing", ClVariant::Pairing)] {
        let key = ClKeypair::generate(variant, hidm_core::credentials::pcred::SLOT_COUNT, &mut rng);
        let cred = pcred_issue(&pii, "did:hidm:patient:vector", &biohash, "did:hidm:apc", &key, &mut ApcStore::default(), ISSUED_AT, &mut rng)
            .map_err(|e| fail(&e))?;
        let proof = pok::prove(&cred.slots(), &cred.sig, &key.public(), &[SLOT_BIOHASH], b"vectors", &mut rng).map_err(|e| fail(&e))?;
        cl_keys.insert(name.into(), serde_json::to_value(key.public()).map_err(|e| fail(&e))?);
        credentials.insert(name.into(), serde_json::to_value(&cred).map_err(|e| fail(&e))?);
        proofs.insert(name.into(), serde_json::to_value(&proof).map_err(|e| fail(&e))?);
        if variant == ClVariant::Pairing {
            pairing_fixture = Some((key, cred));
        }
    }
    let (cl_key, cred) = pairing_fixture.expect("pairing variant generated");
    let cl_public = cl_key.public();

    let patient_keys = PrePatientKeys::generate(&mut rng);
    let hrr_keys = PreHrrKeys::generate(&mut rng);
    let (pai, witness) = pseudonym_generate(&cred.patient_id, &patient_keys, hrr_keys.public(), &mut rng);
    let hrr_pseudonym = transform_to_hrr(&pai, hrr_keys.public()).map_err(|e| fail(&e))?;
    let pbp_proof = pbp::prove(&pai.pseudonym, &witness.r, &witness.h, patient_keys.public(), PbpMode::Strict, &mut rng);

    let pta_key = SchnorrKeypair::generate(group, &mut rng);
    let pt_pok = pok::prove(&cred.slots(), &cred.sig, &cl_public, &[SLOT_PATIENT_ID], b"vectors/pt", &mut rng).map_err(|e| fail(&e))?;
    let (pt, _) = pt_issue(
        &PtRequest {
            pok: &pt_pok,
            pok_context: b"vectors/pt",
            pseudonym: &pai.pseudonym,
            pk_patient: patient_keys.public(),
            pbp: &pbp_proof,
        },
        &cl_public,
        PbpMode::Strict,
        group,
        &pta_key,
        &mut PtaStore::default(),
        &mut rng,
    )
    .map_err(|e| fail(&e))?;

    let apc_token_key = SchnorrKeypair::generate(group, &mut rng);
    let mut at_signer_rng = derive_rng(seed, "vectors/at-signer");
    let (token, _) = at::at_issue(
        &pt_pok,
        b"vectors/pt",
        &cl_public,
        group,
        &apc_token_key,
        ISSUED_AT,
        &AtPolicy::default(),
        &mut rng,
        &mut at_signer_rng,
    )
    .map_err(|e| fail(&e))?;

    let ibs_master = IbsMasterKey::generate(&mut rng);
    let identity = pai.pseudonym.to_bytes();
    let extraction = BlindExtraction::start(&identity, &mut rng);
    let blinded = *extraction.request();
    let blinded_response = ibs_master.extract_blinded(&blinded).map_err(|e| fail(&e))?;
    let user_key = extraction.finish(&blinded_response, ibs_master.public()).map_err(|e| fail(&e))?;
    let ibs_msg = b"hidm ibs vector".to_vec();
    let ibs_sig = ibs::sign(&ibs_msg, &user_key, &mut rng);

    let mut chain = HashChain::new();
    chain.append(b"first entry".to_vec()).map_err(|e| fail(&e))?;
    chain.append(b"second entry".to_vec()).map_err(|e| fail(&e))?;

    Ok(json!({
        "seed": seed,
        "schnorr_group": {
            "p": group.p().to_str_radix(16),
            "q": group.q().to_str_radix(16),
            "g": group.g().to_str_radix(16),
        },
        "schnorr": {
            "public": schnorr_key.public().to_str_radix(16),
            "message": hex::encode(&schnorr_msg),
            "signature": schnorr_sig,
        },
        "pbs": {
            "public": pbs_key.public().to_str_radix(16),
            "info": hex::encode(b"common info"),
            "message": hex::encode(b"hidden message"),
            "signature": pbs_sig,
            "signer_view": pbs_transcript,
        },
        "rsa": {
            "public": hex::encode(rsa.public().to_bytes()),
            "message": hex::encode(b"hidm rsa vector"),
            "signature": rsa_sig,
        },
        "cl_public_keys": cl_keys,
        "patient_credentials": credentials,
        "pok_disclosing_biohash": proofs,
        "pre": {
            "patient_public": patient_keys.public().to_hex(),
            "hrr_public": hrr_keys.public().to_hex(),
            "pai": pai,
            "hrr_pseudonym": hrr_pseudonym,
        },
        "pbp": pbp_proof,
        "pseudonym_token": { "pta_public": pta_key.public().to_str_radix(16), "token": pt },
        "appointment_token": { "apc_public": apc_token_key.public().to_str_radix(16), "token": token },
        "ibs": {
            "master_public": ibs_master.public().to_hex(),
            "blinded_request": blinded.to_hex(),
            "blinded_response": blinded_response.to_hex(),
            "user_key": user_key.point().to_hex(),
            "message": hex::encode(&ibs_msg),
            "signature": ibs_sig,
        },
        "ledger": chain.entries(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_vectors() {
        let a = serde_json::to_string(&emit(5).unwrap()).unwrap();
        assert_eq!(a, serde_json::to_string(&emit(5).unwrap()).unwrap());
        assert_ne!(a, serde_json::to_string(&emit(6).unwrap()).unwrap());
    }
}
