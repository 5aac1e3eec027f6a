//! The three issuer-signed artifacts (patient credential, pseudonym token,
//! appointment token), the issuer-side stores they populate, and the
//! biometric hash bound into the credential.
//!
//! Artifact JSON carries a `schema` field fixed to [`SCHEMA_VERSION`].

pub mod at;
pub mod biohash;
pub mod pcred;
pub mod pt;

use thiserror::Error;

pub use at::{AppointmentToken, AtPolicy, AtStatus};
pub use biohash::{BioHash, BioHashParams};
pub use pcred::{ApcStore, PatientCredential, PiiBundle};
pub use pt::{PseudonymToken, PtaStore};

pub const SCHEMA_VERSION: &str = "hidm/v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CredentialError {
    #[error("identity proofing failed")]
    IdentityProofingFailed,
    #[error("credential proof rejected")]
    CredentialProofRejected,
    #[error("pseudonym binding rejected")]
    PseudonymBindingRejected,
    #[error("feature vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Signature(#[from] crate::signatures::SignatureError),
}

pub(crate) fn schema_tag() -> String {
    SCHEMA_VERSION.to_string()
}

pub(crate) mod schema {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &str, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
        let v = String::deserialize(d)?;
        if v != super::SCHEMA_VERSION {
            return Err(D::Error::custom(format!("unsupported schema {v:?}")));
        }
        Ok(v)
    }
}
