//! Entity state machines and the eight protocol episodes.
//!
//! Every episode message is a serde value sealed into an authenticated
//! channel frame, recorded on the [`Wire`](channel::Wire), and opened by the
//! receiver; nothing crosses between entities any other way. Issuers derive
//! per-episode randomness from the world seed, so a sequential run is
//! reproducible byte for byte.

pub mod channel;
pub mod entities;
pub mod episodes;
pub mod lvc;
pub mod query;
pub mod trace;
pub mod world;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{ChannelEnd, ChannelError, Wire, WireFrame};
pub use entities::{Booking, Identity, Patient, Wallet};
pub use episodes::{
    booking_message, proof_context, AccessBody, AccessRequest, AccessType, AppointmentRequest, EntryType, Episode, EpisodeFailure,
    HealthEntry, RecordView,
};
pub use lvc::LegitimacyCredential;
pub use query::{AuthorityAuditRequest, PatientAuditRequest, QueryResult};
pub use trace::{PtaDisclosure, VerifiedWarrant, Warrant};
pub use world::{PatientReport, RunReport, ScenarioConfig, VisitOutcome, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Patient,
    GHA,
    AuditorAuthority,
    Auditor,
    APC,
    PTA,
    HO,
    HP,
    HRR,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActorError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("peer is not a legitimate {0}")]
    IllegitimatePeer(Role),
    #[error(transparent)]
    Credential(#[from] crate::credentials::CredentialError),
    #[error(transparent)]
    Ledger(#[from] crate::ledgers::LedgerError),
    #[error("replay rejected")]
    ReplayRejected,
    #[error("token expired")]
    TokenExpired,
    #[error("appointment token signature invalid")]
    BadAppointmentToken,
    #[error("requester not bound to pseudonym")]
    NotBoundToPseudonym,
    #[error("malformed PAI")]
    MalformedPai,
    #[error("confirmation code invalid")]
    UnknownConfirmation,
    #[error("biometric verification failed")]
    BiometricMismatch,
    #[error("pseudonym token rejected")]
    BadPseudonymToken,
    #[error("insufficient authorization")]
    InsufficientAuthorization,
    #[error("record reference invalid")]
    RecordReferenceInvalid,
    #[error("trace refused")]
    TraceRefused,
    #[error("issued artifact failed verification: {0}")]
    BadArtifact(&'static str),
    #[error("protocol state: {0}")]
    State(&'static str),
    #[error("malformed message: {0}")]
    Malformed(String),
}

impl From<crate::signatures::SignatureError> for ActorError {
    fn from(e: crate::signatures::SignatureError) -> Self {
        ActorError::Credential(e.into())
    }
}
