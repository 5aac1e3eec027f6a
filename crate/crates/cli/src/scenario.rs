//! `hidm run`: load a scenario, drive every visit, write the transcript and
//! ledgers.

use std::path::{Path, PathBuf};

use hidm_core::actors::{RunReport, ScenarioConfig, World};
use hidm_core::ledgers::{AccessLevel, EventType};
use serde::Serialize;

use crate::CliError;

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate().map_err(CliError::Config)?;
    Ok(config)
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub records: usize,
    pub patient_tier: usize,
    pub authority_tier: usize,
    pub issuance_events: usize,
    pub access_events: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub seed: u64,
    pub patients: usize,
    pub visits_per_patient: u32,
    pub completed_visits: usize,
    pub transcript_frames: usize,
    pub audit: AuditSummary,
    pub ledgers_intact: bool,
    pub first_failure: Option<String>,
    pub output_dir: Option<PathBuf>,
}

/// Runs the scenario; with `out`, ledgers are persisted under
/// `out/ledgers/` and the transcript, report and summary are written as JSON.
pub fn run_scenario(mut config: ScenarioConfig, out: Option<&Path>) -> Result<(ScenarioSummary, RunReport), CliError> {
    if config.seed.is_none() {
        config.seed = crate::env_seed()?;
    }
    if let (Some(dir), None) = (out, &config.ledger_dir) {
        config.ledger_dir = Some(dir.join("ledgers"));
    }
    let world = World::new(config)?;
    let (_, report) = world.run()?;

    let snapshot = world.audit.snapshot(world.admin_token());
    let audit = AuditSummary {
        records: snapshot.len(),
        patient_tier: snapshot.iter().filter(|r| r.access_level == AccessLevel::PatientAccessible).count(),
        authority_tier: snapshot
            .iter()
            .filter(|r| r.access_level == AccessLevel::AuditorAuthorityAccessible)
            .count(),
        issuance_events: snapshot.iter().filter(|r| r.event_type.is_issuance()).count(),
        access_events: snapshot.iter().filter(|r| r.event_type == EventType::HealthRecordAccess).count(),
    };
    let first_failure = report
        .patients
        .iter()
        .find_map(|p| p.failure.as_ref().map(|f| format!("patient {}: {f}", p.index)));
    let frames = world.wire.frames();
    let summary = ScenarioSummary {
        seed: world.seed,
        patients: world.config.patients,
        visits_per_patient: world.config.visits,
        completed_visits: report.completed_visits(),
        transcript_frames: frames.len(),
        audit,
        ledgers_intact: world.dids.chain_ok() && world.ati.chain_ok() && world.audit.chain_ok(),
        first_failure,
        output_dir: out.map(Path::to_path_buf),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
        write_json(&dir.join("transcript.json"), &frames)?;
        write_json(&dir.join("report.json"), &report)?;
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok((summary, report))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
