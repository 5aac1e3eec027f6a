//! Scenario runner, benchmark harness, attack simulator and test-vector
//! emitter behind the `hidm` binary.

pub mod attack;
pub mod bench;
pub mod scenario;
pub mod vectors;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("protocol failure: {0}")]
    Protocol(String),
}

impl CliError {
    /// 1 for protocol failures, 2 for configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Protocol(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl From<hidm_core::actors::ActorError> for CliError {
    fn from(e: hidm_core::actors::ActorError) -> Self {
        CliError::Protocol(e.to_string())
    }
}

/// Seed from `HIDM_SEED` when set.
pub fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(hidm_core::algebra::SEED_ENV_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("HIDM_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}
