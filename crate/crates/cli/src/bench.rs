//! Benchmark harness. Every (scheme, scenario) cell is executed twelve
//! times; the fastest and slowest runs are dropped and the remaining ten
//! averaged. Timing covers proof generation, verification and signing for
//! the scenario; fixtures and size accounting are outside the timed region.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use hidm_core::actors::booking_message;
use hidm_core::algebra::{derive_rng, Codec, HidmRng, SchnorrGroup};
use hidm_core::clock::Timestamp;
use hidm_core::credentials::at::{self, AppointmentToken, AtPolicy};
use hidm_core::credentials::pcred::{pcred_issue, SLOT_BIOHASH, SLOT_PATIENT_ID};
use hidm_core::credentials::pt::{pt_verify, signed_message};
use hidm_core::credentials::{ApcStore, BioHashParams, PatientCredential, PiiBundle, PseudonymToken, SCHEMA_VERSION};
use hidm_core::pre::{pseudonym_generate, PreHrrKeys, PrePatientKeys, Pseudonym};
use hidm_core::proofs::pok;
use hidm_core::signatures::ibs::{self, BlindExtraction};
use hidm_core::signatures::rsa_sig::{self, RsaKeypair};
use hidm_core::signatures::{cl, schnorr, ClKeypair, ClPublicKey, ClVariant, IbsMasterKey, IbsUserKey, SchnorrKeypair};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::CliError;

pub const RUNS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "RSA")]
    Rsa,
    #[serde(rename = "CL-RSA")]
    ClRsa,
    #[serde(rename = "CL-pairing")]
    ClPairing,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Rsa, Scheme::ClRsa, Scheme::ClPairing];

    fn variant(self) -> ClVariant {
        match self {
            Scheme::ClRsa => ClVariant::Rsa,
            Scheme::Rsa | Scheme::ClPairing => ClVariant::Pairing,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rsa => "RSA",
            Scheme::ClRsa => "CL-RSA",
            Scheme::ClPairing => "CL-pairing",
        })
    }
}

impl FromStr for Scheme {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "rsa" => Ok(Scheme::Rsa),
            "cl-rsa" => Ok(Scheme::ClRsa),
            "cl-pairing" | "cl-bilinear" => Ok(Scheme::ClPairing),
            _ => Err(CliError::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    CredentialIssuance,
    PseudonymTokenIssuance,
    PseudonymKeyIssuance,
    AppointmentTokenIssuance,
    AppointmentBooking,
    InPersonVerification,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::CredentialIssuance,
        Scenario::PseudonymTokenIssuance,
        Scenario::PseudonymKeyIssuance,
        Scenario::AppointmentTokenIssuance,
        Scenario::AppointmentBooking,
        Scenario::InPersonVerification,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serializes");
        f.write_str(s.as_str().expect("unit variant"))
    }
}

impl FromStr for Scenario {
    type Err = CliError;
    /// Accepts the 1-based scenario number or its kebab-case name.
    fn from_str(s: &str) -> Result<Self, CliError> {
        if let Ok(n) = s.parse::<usize>() {
            return n
                .checked_sub(1)
                .and_then(|i| Scenario::ALL.get(i).copied())
                .ok_or_else(|| CliError::Config(format!("scenario number must be 1-6, got {n}")));
        }
        serde_json::from_value(json!(s)).map_err(|_| CliError::Config(format!("unknown scenario {s:?}")))
    }
}

/// RSA is a baseline for credential issuance only.
pub fn valid_pair(scheme: Scheme, scenario: Scenario) -> bool {
    scheme != Scheme::Rsa || scenario == Scenario::CredentialIssuance
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub payload_pre_signature: Option<usize>,
    pub full_request: Option<usize>,
    pub response: usize,
    pub signature: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub scheme: Scheme,
    pub scenario: Scenario,
    #[serde(flatten)]
    pub sizes: Sizes,
    pub avg_time_ms: f64,
    pub samples_ms: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, scheme: Scheme, scenario: Scenario) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.scenario == scenario)
    }

    /// CL-RSA time over CL-pairing time for one scenario.
    pub fn speedup(&self, scenario: Scenario) -> Option<f64> {
        Some(self.row(Scheme::ClRsa, scenario)?.avg_time_ms / self.row(Scheme::ClPairing, scenario)?.avg_time_ms)
    }
}

/// Mean after dropping one maximum and one minimum sample.
pub fn trimmed_mean(samples: &[f64]) -> f64 {
    assert!(samples.len() > 2, "need at least three samples");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[1..sorted.len() - 1];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Keys and artifacts a scenario starts from.
pub struct Fixture {
    group: &'static SchnorrGroup,
    rsa: RsaKeypair,
    cl: ClKeypair,
    cl_pk: ClPublicKey,
    cred: PatientCredential,
    pta: SchnorrKeypair,
    apc_token: SchnorrKeypair,
    ibs: IbsMasterKey,
    pseudonym: Pseudonym,
    pai: hidm_core::pre::Pai,
    sk_p: IbsUserKey,
    pt: PseudonymToken,
    at: AppointmentToken,
}

const CONTEXT: &[u8] = b"hidm-bench";

impl Fixture {
    pub fn new(variant: ClVariant, seed: u64) -> Fixture {
        let mut rng = derive_rng(seed, &format!("bench-fixture/{variant:?}"));
        let group = SchnorrGroup::standard();
        let cl = ClKeypair::generate(variant, hidm_core::credentials::pcred::SLOT_COUNT, &mut rng);
        let cl_pk = cl.public();
        let pii = PiiBundle {
            full_name: "Bench Patient".into(),
            date_of_birth: "1980-04-01".into(),
            national_id: "NID000000000042".into(),
            address: "1 Bench Road".into(),
        };
        let bio = BioHashParams::default();
        let biohash = bio.enroll(&bio.random_features(&mut rng)).expect("dimension matches");
        let cred = pcred_issue(
            &pii,
            "did:hidm:patient:bench",
            &biohash,
            "did:hidm:apc",
            &cl,
            &mut ApcStore::default(),
            Timestamp(1_767_225_600),
            &mut rng,
        )
        .expect("proofing passes");
        let hrr = PreHrrKeys::generate(&mut rng);
        let (pai, _) = pseudonym_generate(&cred.patient_id, &PrePatientKeys::generate(&mut rng), hrr.public(), &mut rng);
        let pseudonym = pai.pseudonym.clone();
        let ibs = IbsMasterKey::generate(&mut rng);
        let sk_p = ibs.extract_direct(&pseudonym.to_bytes());
        let pta = SchnorrKeypair::generate(group, &mut rng);
        let mut pti = [0u8; 16];
        rng.fill_bytes(&mut pti);
        let pt = PseudonymToken {
            schema: SCHEMA_VERSION.into(),
            pti,
            sig: schnorr::sign(group, &pta, &signed_message(&pti, &pseudonym), &mut rng),
            pseudonym: pseudonym.clone(),
        };
        let apc_token = SchnorrKeypair::generate(group, &mut rng);
        let proof = pok::prove(&cred.slots(), &cred.sig, &cl_pk, &[SLOT_PATIENT_ID], CONTEXT, &mut rng).expect("valid");
        let mut signer_rng = derive_rng(seed, "bench-fixture/signer");
        let (at, _) = at::at_issue(
            &proof,
            CONTEXT,
            &cl_pk,
            group,
            &apc_token,
            cred.issue_date,
            &AtPolicy::default(),
            &mut rng,
            &mut signer_rng,
        )
        .expect("issuance succeeds");
        Fixture {
            group,
            rsa: RsaKeypair::reference(0),
            cl,
            cl_pk,
            cred,
            pta,
            apc_token,
            ibs,
            pseudonym,
            pai,
            sk_p,
            pt,
            at,
        }
    }
}

fn json_len<T: Serialize + ?Sized>(v: &T) -> usize {
    serde_json::to_vec(v).expect("serializes").len()
}

/// One timed execution. Panics if an honest run fails verification.
pub fn run_once(fx: &Fixture, scheme: Scheme, scenario: Scenario, rng: &mut HidmRng) -> (Duration, Sizes) {
    let attrs = fx.cred.slots();
    let attrs_hex: Vec<String> = attrs.iter().map(hex::encode).collect();
    let start = Instant::now();
    match scenario {
        Scenario::CredentialIssuance if scheme == Scheme::Rsa => {
            let payload = serde_json::to_vec(&attrs_hex).expect("serializes");
            let sig = fx.rsa.sign(&payload);
            assert!(rsa_sig::verify(&payload, &sig, fx.rsa.public()));
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: Some(payload.len()),
                    full_request: None,
                    response: json_len(&json!({ "attributes": attrs_hex, "sig": sig })),
                    signature: sig.bytes.len(),
                },
            )
        }
        Scenario::CredentialIssuance => {
            let sig = fx.cl.sign(&attrs, rng).expect("slot count matches");
            assert!(cl::verify(&attrs, &sig, &fx.cl_pk));
            let elapsed = start.elapsed();
            let mut cred = fx.cred.clone();
            cred.sig = sig.clone();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: Some(json_len(&attrs_hex)),
                    full_request: Some(json_len(&json!({ "attributes": attrs_hex, "issuer": fx.cl_pk }))),
                    response: json_len(&cred),
                    signature: sig.encoded_len(),
                },
            )
        }
        Scenario::PseudonymTokenIssuance => {
            let proof = pok::prove(&attrs, &fx.cred.sig, &fx.cl_pk, &[SLOT_PATIENT_ID], CONTEXT, rng).expect("valid");
            assert!(pok::verify(&proof, &fx.cl_pk, CONTEXT));
            let mut pt = fx.pt.clone();
            pt.sig = schnorr::sign(fx.group, &fx.pta, &signed_message(&pt.pti, &fx.pseudonym), rng);
            assert!(pt_verify(fx.group, &pt, fx.pta.public()));
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: None,
                    full_request: Some(json_len(&json!({ "pok": proof, "pseudonym": fx.pseudonym }))),
                    response: json_len(&pt),
                    signature: 2 * 32,
                },
            )
        }
        Scenario::PseudonymKeyIssuance => {
            let proof = pok::prove(&attrs, &fx.cred.sig, &fx.cl_pk, &[SLOT_PATIENT_ID], CONTEXT, rng).expect("valid");
            assert!(pok::verify(&proof, &fx.cl_pk, CONTEXT));
            let extraction = BlindExtraction::start(&fx.pseudonym.to_bytes(), rng);
            let blinded = *extraction.request();
            let response = fx.ibs.extract_blinded(&blinded).expect("nonzero request");
            let key = extraction.finish(&response, fx.ibs.public()).expect("valid key");
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: None,
                    full_request: Some(json_len(&json!({ "pok": proof, "blinded": blinded.to_hex() }))),
                    response: json_len(&json!({ "key": response.to_hex() })),
                    signature: key.point().to_bytes().len(),
                },
            )
        }
        Scenario::AppointmentTokenIssuance => {
            let proof = pok::prove(&attrs, &fx.cred.sig, &fx.cl_pk, &[SLOT_PATIENT_ID], CONTEXT, rng).expect("valid");
            let mut signer_rng = derive_rng(rng.next_u64(), "bench-signer");
            let (token, transcript) = at::at_issue(
                &proof,
                CONTEXT,
                &fx.cl_pk,
                fx.group,
                &fx.apc_token,
                fx.cred.issue_date,
                &AtPolicy::default(),
                rng,
                &mut signer_rng,
            )
            .expect("issuance succeeds");
            assert!(at::at_verify_sig(fx.group, &token, fx.apc_token.public()));
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: None,
                    full_request: Some(json_len(&json!({ "pok": proof, "challenge": transcript.blinded_challenge.to_str_radix(16) }))),
                    response: json_len(&transcript),
                    signature: 3 * 32,
                },
            )
        }
        Scenario::AppointmentBooking => {
            let schedule = "slot-0001";
            let msg = booking_message(&fx.pai, &fx.at, schedule);
            let sig = ibs::sign(&msg, &fx.sk_p, rng);
            assert!(ibs::verify(&msg, &sig, &fx.pseudonym.to_bytes(), fx.ibs.public()));
            assert!(at::at_verify_sig(fx.group, &fx.at, fx.apc_token.public()));
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: None,
                    full_request: Some(json_len(&json!({ "pai": fx.pai, "at": fx.at, "schedule": schedule, "sig": sig }))),
                    response: json_len(&json!({ "code": "00".repeat(16) })),
                    signature: 2 * 48,
                },
            )
        }
        Scenario::InPersonVerification => {
            let msg = b"confirmation-code|verifier-nonce";
            let sig = ibs::sign(msg, &fx.sk_p, rng);
            assert!(ibs::verify(msg, &sig, &fx.pseudonym.to_bytes(), fx.ibs.public()));
            let proof = pok::prove(&attrs, &fx.cred.sig, &fx.cl_pk, &[SLOT_BIOHASH], CONTEXT, rng).expect("valid");
            assert!(pok::verify(&proof, &fx.cl_pk, CONTEXT));
            assert!(pt_verify(fx.group, &fx.pt, fx.pta.public()));
            let elapsed = start.elapsed();
            (
                elapsed,
                Sizes {
                    payload_pre_signature: None,
                    full_request: Some(json_len(&json!({ "pseudonym": fx.pseudonym, "pok": proof, "pt": fx.pt, "sig": sig }))),
                    response: json_len(&json!({ "verified": true })),
                    signature: 2 * 48,
                },
            )
        }
    }
}

/// Twelve runs of one cell against a prepared fixture.
pub fn bench_with(fx: &Fixture, scheme: Scheme, scenario: Scenario, seed: u64) -> Result<BenchRow, CliError> {
    if !valid_pair(scheme, scenario) {
        return Err(CliError::Config(format!("{scheme} is only benchmarked for credential-issuance, not {scenario}")));
    }
    let mut rng = derive_rng(seed, &format!("bench/{scheme}/{scenario}"));
    let mut samples = Vec::with_capacity(RUNS);
    let mut sizes = Sizes::default();
    for _ in 0..RUNS {
        let (elapsed, s) = run_once(fx, scheme, scenario, &mut rng);
        samples.push(elapsed.as_secs_f64() * 1e3);
        sizes = s;
    }
    Ok(BenchRow {
        scheme,
        scenario,
        sizes,
        avg_time_ms: trimmed_mean(&samples),
        samples_ms: samples,
    })
}

pub fn bench(scheme: Scheme, scenario: Scenario, seed: u64) -> Result<BenchRow, CliError> {
    if !valid_pair(scheme, scenario) {
        return bench_with(&Fixture::new(ClVariant::Pairing, seed), scheme, scenario, seed);
    }
    bench_with(&Fixture::new(scheme.variant(), seed), scheme, scenario, seed)
}

/// Every valid cell selected by the optional filters.
pub fn bench_matrix(scheme: Option<Scheme>, scenario: Option<Scenario>, seed: u64) -> Result<BenchReport, CliError> {
    if let (Some(s), Some(n)) = (scheme, scenario) {
        return Ok(BenchReport {
            rows: vec![bench(s, n, seed)?],
        });
    }
    let mut rows = Vec::new();
    for variant in [ClVariant::Rsa, ClVariant::Pairing] {
        let fx = Fixture::new(variant, seed);
        for s in Scheme::ALL.into_iter().filter(|s| s.variant() == variant) {
            for n in Scenario::ALL {
                let selected = scheme.is_none_or(|x| x == s) && scenario.is_none_or(|x| x == n);
                if selected && valid_pair(s, n) {
                    rows.push(bench_with(&fx, s, n, seed)?);
                }
            }
        }
    }
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimmed_mean_drops_extremes() {
        let samples = [5.0, 1.0, 2.0, 3.0, 4.0, 100.0, 2.0, 3.0, 4.0, 5.0, 3.0, 0.5];
        // Without 100 and 0.5: 1+2+3+4+2+3+4+5+3+5 = 32.
        assert_eq!(trimmed_mean(&samples), 3.2);
    }

    #[test]
    fn parsing_and_pair_rules() {
        assert_eq!("CL-Bilinear".parse::<Scheme>().unwrap(), Scheme::ClPairing);
        assert_eq!("3".parse::<Scenario>().unwrap(), Scenario::PseudonymKeyIssuance);
        assert_eq!("in-person-verification".parse::<Scenario>().unwrap(), Scenario::InPersonVerification);
        assert!("7".parse::<Scenario>().is_err());
        assert!(!valid_pair(Scheme::Rsa, Scenario::AppointmentBooking));
        assert!(matches!(bench(Scheme::Rsa, Scenario::AppointmentBooking, 1), Err(CliError::Config(_))));
        assert_eq!(Scenario::AppointmentBooking.to_string(), "appointment-booking");
    }
}
