//! Append-only hash chain. `entry_hash = H(prev_hash || payload)` with the
//! genesis `prev_hash` all zeros.
//!
//! When persisted, each entry is one compact JSON line and a sidecar
//! `<file>.head` records the entry count and the last hash, so dropping
//! lines from the tail is detected too. Verification re-serializes every
//! parsed line and demands byte equality, so no byte of the file is
//! outside the check.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LedgerError;
use crate::algebra::{hex_bytes, tagged_digest};

const CHAIN_TAG: &[u8] = b"HIDM/ledger";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerEntry {
    pub seq: u64,
    #[serde(with = "hex_bytes")]
    pub payload: Vec<u8>,
    #[serde(with = "hex_bytes")]
    pub prev_hash: [u8; 32],
    #[serde(with = "hex_bytes")]
    pub entry_hash: [u8; 32],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Head {
    count: u64,
    #[serde(with = "hex_bytes")]
    head_hash: [u8; 32],
}

pub fn entry_hash(prev: &[u8; 32], payload: &[u8]) -> [u8; 32] {
    tagged_digest(CHAIN_TAG, &[prev, payload])
}

#[derive(Debug, Default)]
pub struct HashChain {
    entries: Vec<LedgerEntry>,
    file: Option<PathBuf>,
}

fn head_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".head");
    PathBuf::from(p)
}

fn io_err(e: std::io::Error) -> LedgerError {
    LedgerError::Io(e.to_string())
}

impl HashChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// A fresh chain persisted to `path` (truncating any existing file).
    pub fn persisted(path: impl Into<PathBuf>) -> Result<Self, LedgerError> {
        let path = path.into();
        File::create(&path).map_err(io_err)?;
        let chain = HashChain {
            entries: Vec::new(),
            file: Some(path),
        };
        chain.write_head()?;
        Ok(chain)
    }

    pub fn head(&self) -> [u8; 32] {
        self.entries.last().map(|e| e.entry_hash).unwrap_or([0u8; 32])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn append(&mut self, payload: Vec<u8>) -> Result<u64, LedgerError> {
        let prev_hash = self.head();
        let entry = LedgerEntry {
            seq: self.entries.len() as u64,
            entry_hash: entry_hash(&prev_hash, &payload),
            payload,
            prev_hash,
        };
        if let Some(path) = &self.file {
            let mut line = serde_json::to_vec(&entry).expect("entries serialize");
            line.push(b'\n');
            OpenOptions::new()
                .append(true)
                .open(path)
                .and_then(|mut f| f.write_all(&line))
                .map_err(io_err)?;
        }
        let seq = entry.seq;
        self.entries.push(entry);
        if self.file.is_some() {
            self.write_head()?;
        }
        Ok(seq)
    }

    fn write_head(&self) -> Result<(), LedgerError> {
        let Some(path) = &self.file else {
            return Ok(());
        };
        let head = Head {
            count: self.entries.len() as u64,
            head_hash: self.head(),
        };
        std::fs::write(head_path(path), serde_json::to_vec(&head).expect("head serializes")).map_err(io_err)
    }

    pub fn verify(&self) -> bool {
        chain_verify(&self.entries)
    }
}

/// True iff sequence numbers, back-links and hashes all recompute.
pub fn chain_verify(entries: &[LedgerEntry]) -> bool {
    let mut prev = [0u8; 32];
    for (i, e) in entries.iter().enumerate() {
        if e.seq != i as u64 || e.prev_hash != prev || e.entry_hash != entry_hash(&prev, &e.payload) {
            return false;
        }
        prev = e.entry_hash;
    }
    true
}

/// Parses a persisted ledger strictly and checks it against its head file.
pub fn verify_file(path: &Path) -> Result<Vec<LedgerEntry>, LedgerError> {
    let bytes = std::fs::read(path).map_err(io_err)?;
    let head_bytes = std::fs::read(head_path(path)).map_err(io_err)?;
    let head: Head = serde_json::from_slice(&head_bytes).map_err(|e| LedgerError::Corrupt {
        line: 0,
        reason: format!("head: {e}"),
    })?;
    if serde_json::to_vec(&head).expect("head serializes") != head_bytes {
        return Err(LedgerError::Corrupt {
            line: 0,
            reason: "head file is not canonical".into(),
        });
    }
    if !bytes.is_empty() && bytes.last() != Some(&b'\n') {
        return Err(LedgerError::Corrupt {
            line: 0,
            reason: "missing final newline".into(),
        });
    }
    let mut entries = Vec::new();
    for (i, line) in bytes.split(|b| *b == b'\n').enumerate() {
        if i == bytes.iter().filter(|b| **b == b'\n').count() {
            break;
        }
        let corrupt = |reason: String| LedgerError::Corrupt { line: i + 1, reason };
        let entry: LedgerEntry = serde_json::from_slice(line).map_err(|e| corrupt(e.to_string()))?;
        if serde_json::to_vec(&entry).expect("entries serialize") != line {
            return Err(corrupt("entry is not canonical".into()));
        }
        entries.push(entry);
    }
    if !chain_verify(&entries) {
        return Err(LedgerError::Corrupt {
            line: 0,
            reason: "hash chain broken".into(),
        });
    }
    let tip = entries.last().map(|e| e.entry_hash).unwrap_or([0u8; 32]);
    if head.count != entries.len() as u64 || head.head_hash != tip {
        return Err(LedgerError::Corrupt {
            line: 0,
            reason: "head pointer does not match the chain".into(),
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("hidm-chain-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join("ledger.jsonl")
    }

    #[test]
    fn in_memory_mutation_breaks_chain() {
        let mut c = HashChain::new();
        for i in 0..5u8 {
            c.append(vec![i; 4]).unwrap();
        }
        assert!(c.verify());
        let mut entries = c.entries().to_vec();
        entries[2].payload[0] ^= 1;
        assert!(!chain_verify(&entries));
    }

    #[test]
    fn persisted_round_trip_and_truncation() {
        let path = temp_path("trunc");
        let mut c = HashChain::persisted(&path).unwrap();
        assert!(verify_file(&path).unwrap().is_empty());
        for i in 0..4u8 {
            c.append(vec![i; 3]).unwrap();
        }
        assert_eq!(verify_file(&path).unwrap(), c.entries());
        let text = std::fs::read_to_string(&path).unwrap();
        let kept: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, kept).unwrap();
        assert!(verify_file(&path).is_err());
    }

    #[test]
    fn every_byte_flip_detected() {
        let path = temp_path("flip");
        let mut c = HashChain::persisted(&path).unwrap();
        for i in 0..3u8 {
            c.append(vec![i, 0xab]).unwrap();
        }
        let original = std::fs::read(&path).unwrap();
        for i in 0..original.len() {
            for mask in [0x01u8, 0x20, 0x80] {
                let mut bytes = original.clone();
                bytes[i] ^= mask;
                std::fs::write(&path, &bytes).unwrap();
                assert!(verify_file(&path).is_err(), "byte {i} mask {mask:#x}");
            }
        }
    }
}
