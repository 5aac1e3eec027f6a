//! Mutually authenticated channels: ephemeral Diffie–Hellman in the
//! Schnorr group, each side signing the handshake with the authentication
//! key from its DID document, then AES-256-GCM frames with per-direction
//! keys and strictly increasing sequence numbers.
//!
//! Every frame, handshake messages included, is appended to a shared
//! [`Wire`], which plays the eavesdropper and the transcript recorder.

use std::sync::{Arc, Mutex};

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Nonce};
use hkdf::Hkdf;
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::entities::Identity;
use super::Role;
use crate::algebra::{hex_bytes, hex_uint, SchnorrGroup};
use crate::ledgers::DidLedger;
use crate::signatures::{schnorr, SchnorrSig};

const CHANNEL_INFO: &[u8] = b"HIDM-channel-v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("channel refused: {0}")]
    Refused(&'static str),
    #[error("frame sequence {got} is stale or out of order (expected {expected})")]
    Replay { expected: u64, got: u64 },
    #[error("frame failed authentication")]
    Decrypt,
    #[error("frame belongs to another channel")]
    WrongChannel,
    #[error("payload does not parse: {0}")]
    Payload(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub channel: u64,
    pub from_role: Role,
    pub from: String,
    pub to_role: Role,
    pub to: String,
    pub label: String,
    pub seq: u64,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

/// A plaintext delivered to an entity, kept to check what each role saw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveredMessage {
    pub channel: u64,
    pub to_role: Role,
    pub to: String,
    pub label: String,
    #[serde(with = "hex_bytes")]
    pub plaintext: Vec<u8>,
}

#[derive(Debug, Default)]
struct WireState {
    next_channel: u64,
    frames: Vec<WireFrame>,
    delivered: Vec<DeliveredMessage>,
}

#[derive(Debug, Default)]
pub struct Wire {
    state: Mutex<WireState>,
}

impl Wire {
    pub fn new() -> Arc<Self> {
        Arc::new(Wire::default())
    }

    fn open_channel(&self) -> u64 {
        let mut st = self.state.lock().expect("lock");
        st.next_channel += 1;
        st.next_channel
    }

    fn record(&self, frame: WireFrame) {
        self.state.lock().expect("lock").frames.push(frame);
    }

    fn deliver(&self, msg: DeliveredMessage) {
        self.state.lock().expect("lock").delivered.push(msg);
    }

    /// Everything an eavesdropper captured, in order.
    pub fn frames(&self) -> Vec<WireFrame> {
        self.state.lock().expect("lock").frames.clone()
    }

    /// Plaintexts as received, in order.
    pub fn delivered(&self) -> Vec<DeliveredMessage> {
        self.state.lock().expect("lock").delivered.clone()
    }

    /// Concatenation of all captured frame bytes.
    pub fn captured_bytes(&self) -> Vec<u8> {
        let st = self.state.lock().expect("lock");
        st.frames.iter().flat_map(|f| f.bytes.iter().copied()).collect()
    }
}

#[derive(Serialize)]
struct HandshakeInit<'a> {
    from: &'a str,
    to: &'a str,
    #[serde(with = "hex_uint")]
    ephemeral: BigUint,
    sig: &'a SchnorrSig,
}

#[derive(Serialize)]
struct HandshakeResp<'a> {
    from: &'a str,
    to: &'a str,
    #[serde(with = "hex_uint")]
    ephemeral: BigUint,
    sig: &'a SchnorrSig,
}

pub struct ChannelEnd {
    id: u64,
    local: (Role, String),
    peer: (Role, String),
    direction: u8,
    send_key: [u8; 32],
    recv_key: [u8; 32],
    send_seq: u64,
    recv_seq: u64,
    wire: Arc<Wire>,
}

/// A sealed frame in flight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub channel: u64,
    pub label: String,
    pub seq: u64,
    pub ciphertext: Vec<u8>,
}

fn nonce(direction: u8, seq: u64) -> [u8; 12] {
    let mut n = [0u8; 12];
    n[0] = direction;
    n[4..].copy_from_slice(&seq.to_be_bytes());
    n
}

fn aad(channel: u64, label: &str, seq: u64) -> Vec<u8> {
    let mut a = channel.to_be_bytes().to_vec();
    a.extend(seq.to_be_bytes());
    a.extend(label.as_bytes());
    a
}

impl ChannelEnd {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn peer_did(&self) -> &str {
        &self.peer.1
    }

    pub fn peer_role(&self) -> Role {
        self.peer.0
    }

    pub fn seal(&mut self, label: &str, plaintext: &[u8]) -> Frame {
        let seq = self.send_seq;
        self.send_seq += 1;
        let ciphertext = Aes256Gcm::new((&self.send_key).into())
            .encrypt(
                Nonce::from_slice(&nonce(self.direction, seq)),
                Payload {
                    msg: plaintext,
                    aad: &aad(self.id, label, seq),
                },
            )
            .expect("in-memory encryption cannot fail");
        self.wire.record(WireFrame {
            channel: self.id,
            from_role: self.local.0,
            from: self.local.1.clone(),
            to_role: self.peer.0,
            to: self.peer.1.clone(),
            label: label.to_string(),
            seq,
            bytes: ciphertext.clone(),
        });
        Frame {
            channel: self.id,
            label: label.to_string(),
            seq,
            ciphertext,
        }
    }

    pub fn open(&mut self, frame: &Frame) -> Result<Vec<u8>, ChannelError> {
        if frame.channel != self.id {
            return Err(ChannelError::WrongChannel);
        }
        if frame.seq != self.recv_seq {
            return Err(ChannelError::Replay {
                expected: self.recv_seq,
                got: frame.seq,
            });
        }
        let plaintext = Aes256Gcm::new((&self.recv_key).into())
            .decrypt(
                Nonce::from_slice(&nonce(1 - self.direction, frame.seq)),
                Payload {
                    msg: &frame.ciphertext,
                    aad: &aad(self.id, &frame.label, frame.seq),
                },
            )
            .map_err(|_| ChannelError::Decrypt)?;
        self.recv_seq += 1;
        self.wire.deliver(DeliveredMessage {
            channel: self.id,
            to_role: self.local.0,
            to: self.local.1.clone(),
            label: frame.label.clone(),
            plaintext: plaintext.clone(),
        });
        Ok(plaintext)
    }
}

/// Seals `msg` on `from`, opens it on `to`, and returns what `to` parsed.
pub fn transfer<T: Serialize + DeserializeOwned>(
    from: &mut ChannelEnd,
    to: &mut ChannelEnd,
    label: &str,
    msg: &T,
) -> Result<T, ChannelError> {
    let bytes = serde_json::to_vec(msg).expect("messages serialize");
    let frame = from.seal(label, &bytes);
    let plain = to.open(&frame)?;
    serde_json::from_slice(&plain).map_err(|e| ChannelError::Payload(e.to_string()))
}

fn init_bytes(a: &str, b: &str, ea: &[u8]) -> Vec<u8> {
    let mut m = b"HIDM/channel-init".to_vec();
    for part in [a.as_bytes(), b.as_bytes(), ea] {
        m.extend((part.len() as u32).to_be_bytes());
        m.extend(part);
    }
    m
}

fn resp_bytes(a: &str, b: &str, ea: &[u8], eb: &[u8]) -> Vec<u8> {
    let mut m = b"HIDM/channel-resp".to_vec();
    for part in [a.as_bytes(), b.as_bytes(), ea, eb] {
        m.extend((part.len() as u32).to_be_bytes());
        m.extend(part);
    }
    m
}

fn auth_key(dids: &DidLedger, group: &SchnorrGroup, did: &str) -> Result<BigUint, ChannelError> {
    dids.resolve(did)
        .active()
        .ok_or(ChannelError::Refused("peer DID does not resolve"))?
        .authentication_key(group)
        .ok_or(ChannelError::Refused("peer DID has no authentication key"))
}

/// Runs the two-message handshake between `a` (initiator) and `b`.
pub fn establish<R1, R2>(
    a: &Identity,
    b: &Identity,
    dids: &DidLedger,
    wire: &Arc<Wire>,
    rng_a: &mut R1,
    rng_b: &mut R2,
) -> Result<(ChannelEnd, ChannelEnd), ChannelError>
where
    R1: RngCore + CryptoRng,
    R2: RngCore + CryptoRng,
{
    let group = SchnorrGroup::standard();
    let id = wire.open_channel();
    let frame = |from: &Identity, to: &Identity, label: &str, bytes: Vec<u8>| WireFrame {
        channel: id,
        from_role: from.role,
        from: from.did.clone(),
        to_role: to.role,
        to: to.did.clone(),
        label: label.to_string(),
        seq: 0,
        bytes,
    };

    // Initiator: ephemeral share signed with its DID key.
    let a_key_for_b = auth_key(dids, group, &a.did)?;
    let b_key_for_a = auth_key(dids, group, &b.did)?;
    let xa = group.random_exponent(rng_a);
    let ea = group.exp_g(&xa);
    let ea_bytes = group.encode(&ea);
    let sig_a = schnorr::sign(group, a.auth(), &init_bytes(&a.did, &b.did, &ea_bytes), rng_a);
    let init = HandshakeInit {
        from: &a.did,
        to: &b.did,
        ephemeral: ea.clone(),
        sig: &sig_a,
    };
    wire.record(frame(a, b, "handshake/init", serde_json::to_vec(&init).expect("serializes")));

    // Responder checks the initiator against its DID document.
    if !group.contains(&ea) || !schnorr::verify(group, &init_bytes(&a.did, &b.did, &ea_bytes), &sig_a, &a_key_for_b) {
        return Err(ChannelError::Refused("initiator failed key proof"));
    }
    let xb = group.random_exponent(rng_b);
    let eb = group.exp_g(&xb);
    let eb_bytes = group.encode(&eb);
    let transcript = resp_bytes(&a.did, &b.did, &ea_bytes, &eb_bytes);
    let sig_b = schnorr::sign(group, b.auth(), &transcript, rng_b);
    let resp = HandshakeResp {
        from: &b.did,
        to: &a.did,
        ephemeral: eb.clone(),
        sig: &sig_b,
    };
    wire.record(frame(b, a, "handshake/resp", serde_json::to_vec(&resp).expect("serializes")));

    if !group.contains(&eb) || !schnorr::verify(group, &transcript, &sig_b, &b_key_for_a) {
        return Err(ChannelError::Refused("responder failed key proof"));
    }

    let derive = |shared: &BigUint| -> ([u8; 32], [u8; 32]) {
        let salt = Sha256::digest(&transcript);
        let hk = Hkdf::<Sha256>::new(Some(&salt), &group.encode(shared));
        let mut okm = [0u8; 64];
        hk.expand(CHANNEL_INFO, &mut okm).expect("64 bytes is a valid HKDF length");
        let (ab, ba) = okm.split_at(32);
        (ab.try_into().expect("32"), ba.try_into().expect("32"))
    };
    let (a_to_b, b_to_a) = derive(&group.exp(&eb, &xa));
    let (a_to_b_resp, b_to_a_resp) = derive(&group.exp(&ea, &xb));
    debug_assert_eq!((a_to_b, b_to_a), (a_to_b_resp, b_to_a_resp));

    let end_a = ChannelEnd {
        id,
        local: (a.role, a.did.clone()),
        peer: (b.role, b.did.clone()),
        direction: 0,
        send_key: a_to_b,
        recv_key: b_to_a,
        send_seq: 0,
        recv_seq: 0,
        wire: wire.clone(),
    };
    let end_b = ChannelEnd {
        id,
        local: (b.role, b.did.clone()),
        peer: (a.role, a.did.clone()),
        direction: 1,
        send_key: b_to_a_resp,
        recv_key: a_to_b_resp,
        send_seq: 0,
        recv_seq: 0,
        wire: wire.clone(),
    };
    Ok((end_a, end_b))
}
