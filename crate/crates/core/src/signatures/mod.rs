//! Signature schemes composed by the framework: Schnorr, partially blind
//! Schnorr, Camenisch–Lysyanskaya credentials (strong-RSA and pairing
//! variants), blind identity-based signatures, and plain RSA for
//! legitimacy credentials.
//!
//! Every challenge hash carries its own domain tag.

pub mod cl;
pub mod ibs;
pub mod pbs;
pub mod rsa_sig;
pub mod schnorr;

use thiserror::Error;

pub use cl::{ClKeypair, ClPublicKey, ClSignature, ClVariant};
pub use ibs::{IbsMasterKey, IbsSignature, IbsUserKey};
pub use pbs::PartiallyBlindSig;
pub use schnorr::{SchnorrKeypair, SchnorrSig};

pub const SCHNORR_TAG: &[u8] = b"HIDM/schnorr";
pub const PBS_TAG: &[u8] = b"HIDM/pbs";
pub const IBS_TAG: &[u8] = b"HIDM/ibs";
pub const CL_POK_TAG: &[u8] = b"HIDM/cl-pok";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("expected {expected} attributes, got {got}")]
    SlotCount { expected: usize, got: usize },
    #[error("signer commitment is not a subgroup element")]
    BadCommitment,
    #[error("signer response does not match its commitment")]
    BadResponse,
    #[error("blinded identity must not be the identity element")]
    IdentityElement,
    #[error("extracted key fails the pairing check")]
    BadExtractedKey,
    #[error("attribute exceeds the message space")]
    AttributeTooLarge,
    #[error("rsa: {0}")]
    Rsa(String),
}
