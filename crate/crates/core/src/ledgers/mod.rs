//! Simulated permissioned ledgers: DID documents, appointment-token usage
//! and the tiered audit log. Each is a hash chain with optional JSON-lines
//! persistence; writes serialize on one lock per ledger.

pub mod ati;
pub mod audit;
pub mod chain;
pub mod did;

use thiserror::Error;

pub use ati::{AtiLedger, AtiStatus};
pub use audit::{AccessLevel, AdminToken, AuditFilter, AuditLedger, AuditRecord, EventType, OriginModule, QueryMetadata, VerifiedAccess};
pub use chain::{chain_verify, verify_file, HashChain, LedgerEntry};
pub use did::{DidDocument, DidKey, DidLedger, KeyPurpose, Resolution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("unauthorized: {0}")]
    Unauthorized(&'static str),
    #[error("writer {writer} may not log as {claimed}")]
    OriginMismatch { writer: String, claimed: String },
    #[error("unknown writer {0}")]
    UnknownWriter(String),
    #[error("DID {0} already registered")]
    DuplicateDid(String),
    #[error("DID {0} not found")]
    NotFound(String),
    #[error("version must be {expected}, got {got}")]
    VersionMismatch { expected: u64, got: u64 },
    #[error("ledger file: {0}")]
    Io(String),
    #[error("line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("bad filter clause {0:?}")]
    BadFilter(String),
}
