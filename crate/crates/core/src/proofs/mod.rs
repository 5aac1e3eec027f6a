//! Zero-knowledge proofs: selective disclosure of a CL-signed credential
//! and the pseudonym binding proof. Both are Fiat–Shamir sigma protocols.

pub mod pbp;
pub mod pok;

use thiserror::Error;

pub use pbp::{PbProof, PbpMode};
pub use pok::{DisclosedAttribute, PokBody, PoKPCred};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("credential signature does not verify")]
    InvalidCredential,
    #[error("disclosure set names slot {0}, outside the credential")]
    BadDisclosure(usize),
}
