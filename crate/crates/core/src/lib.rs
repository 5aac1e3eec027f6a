//! Protocol library for a pseudonymous healthcare identity-management
//! framework: credential issuance, pairing-based pseudonyms with proxy
//! re-encryption, blind tokens, hash-chained audit ledgers and the
//! entity state machines that tie them together.

pub mod actors;
pub mod algebra;
pub mod clock;
pub mod credentials;
pub mod ledgers;
pub mod pre;
pub mod proofs;
pub mod signatures;
