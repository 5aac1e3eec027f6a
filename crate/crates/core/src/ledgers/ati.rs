//! Appointment-token usage ledger. Answers one question for a presented
//! identifier (first use or replay) and never enumerates. The chain
//! records digests of used identifiers.

use std::collections::HashSet;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::HashChain;
use crate::algebra::tagged_digest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtiStatus {
    Fresh,
    Replayed,
}

#[derive(Debug, Default)]
struct AtiState {
    used: HashSet<[u8; 16]>,
    chain: HashChain,
}

#[derive(Debug, Default)]
pub struct AtiLedger {
    state: Mutex<AtiState>,
}

impl AtiLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_chain(chain: HashChain) -> Self {
        AtiLedger {
            state: Mutex::new(AtiState {
                used: HashSet::new(),
                chain,
            }),
        }
    }

    /// Atomic test-and-set.
    pub fn check_and_mark(&self, ati: &[u8; 16]) -> AtiStatus {
        let mut st = self.state.lock().expect("lock");
        if !st.used.insert(*ati) {
            return AtiStatus::Replayed;
        }
        let digest = tagged_digest(b"HIDM/ati-used", &[ati]);
        st.chain
            .append(digest.to_vec())
            .expect("ledger persistence failed");
        AtiStatus::Fresh
    }

    pub fn chain_ok(&self) -> bool {
        self.state.lock().expect("lock").chain.verify()
    }
}
