//! Attack harness. Each attack drives a small world into a situation an
//! adversary would create and records whether the system refused it.

use std::fmt;
use std::str::FromStr;

use hidm_core::actors::entities::Ho;
use hidm_core::actors::{ActorError, ChannelError, Identity, Patient, Role, ScenarioConfig, World};
use hidm_core::algebra::{derive_rng, HidmRng, SchnorrGroup};
use hidm_core::signatures::rsa_sig::{self, RsaKeypair};
use hidm_core::signatures::{cl, ibs, pbs, schnorr, ClKeypair, ClVariant, IbsMasterKey, SchnorrKeypair};
use rand::{Rng, RngCore};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    ReplayAti,
    ExpiredAt,
    ForgeSig,
    EavesdropScan,
    ImpersonateHo,
    UnwarrantedTrace,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::ReplayAti,
        AttackKind::ExpiredAt,
        AttackKind::ForgeSig,
        AttackKind::EavesdropScan,
        AttackKind::ImpersonateHo,
        AttackKind::UnwarrantedTrace,
    ];
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("serializes");
        f.write_str(v.as_str().expect("unit variant"))
    }
}

impl FromStr for AttackKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| CliError::Config(format!("unknown attack kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub kind: AttackKind,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

/// Acceptances of forged signatures for one scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeryTally {
    pub scheme: String,
    pub trials: usize,
    pub accepted: usize,
}

fn small_world(patients: usize, seed: u64) -> Result<World, CliError> {
    Ok(World::new(ScenarioConfig {
        patients,
        visits: 1,
        seed: Some(seed),
        ..Default::default()
    })?)
}

/// Patient holding a credential, pseudonym token, key and appointment token.
fn ready(w: &World, i: usize) -> Result<Patient, CliError> {
    let mut p = w.new_patient(i)?;
    w.e1_patient_credential(&mut p)?;
    w.e2_pseudonym_token(&mut p, true)?;
    w.e3_pseudonym_key(&mut p)?;
    w.e4_appointment_token(&mut p)?;
    Ok(p)
}

fn outcome(kind: AttackKind, expected: impl Into<String>, observed: impl Into<String>) -> AttackOutcome {
    let (expected, observed) = (expected.into(), observed.into());
    AttackOutcome {
        kind,
        pass: expected == observed,
        expected,
        observed,
    }
}

fn describe<T>(r: Result<T, ActorError>) -> String {
    match r {
        Ok(_) => "accepted".into(),
        Err(e) => e.to_string(),
    }
}

pub fn contains(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

pub fn run_attack(kind: AttackKind, seed: u64) -> Result<AttackOutcome, CliError> {
    match kind {
        AttackKind::ReplayAti => {
            let w = small_world(1, seed)?;
            let mut p = ready(&w, 0)?;
            w.e5_book(&mut p, 0)?;
            let second = w.e5_book(&mut p, 1 % w.hos.len());
            Ok(outcome(kind, ActorError::ReplayRejected.to_string(), describe(second)))
        }
        AttackKind::ExpiredAt => {
            let w = small_world(1, seed)?;
            let mut p = ready(&w, 0)?;
            let policy = w.config.at_policy();
            w.clock.advance(policy.validity_secs + policy.clock_skew_secs + 1);
            Ok(outcome(kind, ActorError::TokenExpired.to_string(), describe(w.e5_book(&mut p, 0))))
        }
        AttackKind::ForgeSig => {
            let tallies = forgery_sweep(50, seed);
            let accepted: usize = tallies.iter().map(|t| t.accepted).sum();
            let trials: usize = tallies.iter().map(|t| t.trials).sum();
            Ok(outcome(kind, format!("0/{trials} accepted"), format!("{accepted}/{trials} accepted")))
        }
        AttackKind::EavesdropScan => {
            let w = small_world(3, seed)?;
            let (patients, _) = w.run()?;
            let captured = w.wire.captured_bytes();
            let mut leaks = 0;
            for p in &patients {
                if let Some(pid) = p.patient_id() {
                    leaks += usize::from(contains(&captured, pid) || contains(&captured, hex::encode(pid).as_bytes()));
                }
                leaks += p.pii.scan_strings().iter().filter(|s| contains(&captured, s.as_bytes())).count();
                if let Some(at) = &p.wallet.at {
                    leaks += usize::from(contains(&captured, &at.ati) || contains(&captured, hex::encode(at.ati).as_bytes()));
                }
            }
            Ok(outcome(kind, "0 identifiers on the wire", format!("{leaks} identifiers on the wire")))
        }
        AttackKind::ImpersonateHo => {
            let mut w = small_world(1, seed)?;
            let mut p = ready(&w, 0)?;
            let mut rng = derive_rng(seed, "attack/rogue-ho");
            let rogue = Identity::new(Role::HO, "did:hidm:ho:rogue", &mut rng);
            rogue.register(&w.dids, vec![], &mut rng).map_err(ActorError::from)?;
            let stolen = w.hos[0].lvc.clone();
            w.hos.push(Ho::new(rogue, stolen));
            let rogue_index = w.hos.len() - 1;
            Ok(outcome(
                kind,
                ActorError::IllegitimatePeer(Role::HO).to_string(),
                describe(w.e5_book(&mut p, rogue_index)),
            ))
        }
        AttackKind::UnwarrantedTrace => {
            let w = small_world(1, seed)?;
            let (patients, _) = w.run()?;
            let target = patients[0]
                .pseudonym()
                .ok_or(CliError::Protocol("patient holds no pseudonym".into()))?
                .to_hex();
            let before = w.audit.len();
            let mut warrant = w.issue_warrant(&target, "no court order");
            warrant.sig = w.gha.rsa.sign(&warrant.signing_bytes());
            let observed = describe(w.trace_identity(&warrant));
            let observed = if w.audit.len() == before {
                observed
            } else {
                format!("{observed}; audit changed")
            };
            Ok(outcome(kind, ActorError::TraceRefused.to_string(), observed))
        }
    }
}

/// Rewrites one hex digit inside a random string leaf of the JSON form.
/// `None` if the result no longer parses, which counts as a rejection.
pub fn mutate_json<T: Serialize + DeserializeOwned>(value: &T, rng: &mut HidmRng) -> Option<T> {
    let mut v = serde_json::to_value(value).expect("serializes");
    let mut leaves = Vec::new();
    collect_hex_leaves(&mut v, &mut leaves);
    let leaf = leaves.swap_remove(rng.gen_range(0..leaves.len()));
    let mut chars: Vec<char> = leaf.chars().collect();
    let i = rng.gen_range(0..chars.len());
    let old = chars[i].to_digit(16).expect("hex digit");
    let new = (old + rng.gen_range(1..16)) % 16;
    chars[i] = std::char::from_digit(new, 16).expect("nibble");
    *leaf = chars.into_iter().collect();
    serde_json::from_value(v).ok()
}

fn collect_hex_leaves<'a>(v: &'a mut Value, out: &mut Vec<&'a mut String>) {
    match v {
        Value::String(s) if !s.is_empty() && s.chars().all(|c| c.is_ascii_hexdigit()) => out.push(s),
        Value::Array(items) => items.iter_mut().for_each(|x| collect_hex_leaves(x, out)),
        Value::Object(map) => map.values_mut().for_each(|x| collect_hex_leaves(x, out)),
        _ => {}
    }
}

fn message(rng: &mut HidmRng) -> Vec<u8> {
    let mut m = vec![0u8; 32];
    rng.fill_bytes(&mut m);
    m
}

/// Per scheme, alternates three forgery classes: a signature under an
/// unrelated key, a valid signature moved to another message, and a
/// one-digit mutation of a valid signature.
pub fn forgery_sweep(trials: usize, seed: u64) -> Vec<ForgeryTally> {
    let mut rng = derive_rng(seed, "forgery-sweep");
    let group = SchnorrGroup::standard();
    let mut tallies = Vec::new();

    let key = SchnorrKeypair::generate(group, &mut rng);
    let other = SchnorrKeypair::generate(group, &mut rng);
    let accepted = (0..trials)
        .filter(|i| {
            let m = message(&mut rng);
            let sig = match i % 3 {
                0 => schnorr::sign(group, &other, &m, &mut rng),
                1 => schnorr::sign(group, &key, &message(&mut rng), &mut rng),
                _ => match mutate_json(&schnorr::sign(group, &key, &m, &mut rng), &mut rng) {
                    Some(s) => s,
                    None => return false,
                },
            };
            schnorr::verify(group, &m, &sig, key.public())
        })
        .count();
    tallies.push(ForgeryTally {
        scheme: "schnorr".into(),
        trials,
        accepted,
    });

    let info = b"expiry";
    let accepted = (0..trials)
        .filter(|i| {
            let m = message(&mut rng);
            let mut signer_rng = derive_rng(rng.next_u64(), "pbs-signer");
            let signer = if i % 3 == 0 { &other } else { &key };
            let signed = if i % 3 == 1 { message(&mut rng) } else { m.clone() };
            let (sig, _) = pbs::pbs_issue(group, signer, info, &signed, &mut rng, &mut signer_rng).expect("honest run");
            let sig = if i % 3 == 2 {
                match mutate_json(&sig, &mut rng) {
                    Some(s) => s,
                    None => return false,
                }
            } else {
                sig
            };
            pbs::verify(group, &m, info, &sig, key.public())
        })
        .count();
    tallies.push(ForgeryTally {
        scheme: "pbs".into(),
        trials,
        accepted,
    });

    let rsa = RsaKeypair::reference(0);
    let rsa_other = RsaKeypair::reference(1);
    let accepted = (0..trials)
        .filter(|i| {
            let m = message(&mut rng);
            let sig = match i % 3 {
                0 => rsa_other.sign(&m),
                1 => rsa.sign(&message(&mut rng)),
                _ => match mutate_json(&rsa.sign(&m), &mut rng) {
                    Some(s) => s,
                    None => return false,
                },
            };
            rsa_sig::verify(&m, &sig, rsa.public())
        })
        .count();
    tallies.push(ForgeryTally {
        scheme: "rsa".into(),
        trials,
        accepted,
    });

    for (name, variant) in [("cl-rsa", ClVariant::Rsa), ("cl-pairing", ClVariant::Pairing)] {
        let key = ClKeypair::generate(variant, 3, &mut rng);
        let other = ClKeypair::generate(variant, 3, &mut rng);
        let public = key.public();
        let accepted = (0..trials)
            .filter(|i| {
                let attrs = [message(&mut rng), message(&mut rng), message(&mut rng)];
                let sig = match i % 3 {
                    0 => other.sign(&attrs, &mut rng).expect("slot count"),
                    1 => key
                        .sign(&[attrs[0].clone(), attrs[1].clone(), message(&mut rng)], &mut rng)
                        .expect("slot count"),
                    _ => match mutate_json(&key.sign(&attrs, &mut rng).expect("slot count"), &mut rng) {
                        Some(s) => s,
                        None => return false,
                    },
                };
                cl::verify(&attrs, &sig, &public)
            })
            .count();
        tallies.push(ForgeryTally {
            scheme: name.into(),
            trials,
            accepted,
        });
    }

    let master = IbsMasterKey::generate(&mut rng);
    let rogue = IbsMasterKey::generate(&mut rng);
    let id = b"pseudonym-under-attack";
    let user = master.extract_direct(id);
    let neighbour = master.extract_direct(b"another-pseudonym");
    let accepted = (0..trials)
        .filter(|i| {
            let m = message(&mut rng);
            let sig = match i % 4 {
                0 => ibs::sign(&m, &rogue.extract_direct(id), &mut rng),
                1 => ibs::sign(&message(&mut rng), &user, &mut rng),
                2 => ibs::sign(&m, &neighbour, &mut rng),
                _ => match mutate_json(&ibs::sign(&m, &user, &mut rng), &mut rng) {
                    Some(s) => s,
                    None => return false,
                },
            };
            ibs::verify(&m, &sig, id, master.public())
        })
        .count();
    tallies.push(ForgeryTally {
        scheme: "ibs".into(),
        trials,
        accepted,
    });
    tallies
}

/// A revoked organization is refused at channel setup.
pub fn revoked_ho_refused(seed: u64) -> Result<bool, CliError> {
    let w = small_world(1, seed)?;
    let mut p = ready(&w, 0)?;
    w.revoke(&w.hos[0].id.did)?;
    Ok(matches!(w.e5_book(&mut p, 0), Err(ActorError::Channel(ChannelError::Refused(_)))))
}
