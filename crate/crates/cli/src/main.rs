//! `hidm` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hidm::attack::{self, AttackKind};
use hidm::bench::{self, Scenario, Scheme};
use hidm::scenario::{self, write_json};
use hidm::{env_seed, vectors, CliError};
use hidm_core::ledgers::verify_file;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hidm", version, about = "Healthcare identity management simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for the transcript, report and persisted ledgers.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the issuance, booking and verification scenarios.
    Bench {
        /// RSA, CL-RSA or CL-pairing.
        #[arg(long)]
        scheme: Option<String>,
        /// Scenario number 1-6 or its name.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one attack, or all of them.
    Attack {
        #[arg(long)]
        kind: Option<String>,
    },
    /// Ledger maintenance.
    Ledger {
        #[command(subcommand)]
        action: LedgerAction,
    },
    /// Deterministic test vectors.
    Vectors {
        #[command(subcommand)]
        action: VectorsAction,
    },
}

#[derive(Subcommand)]
enum LedgerAction {
    /// Verify a persisted ledger file against its head.
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum VectorsAction {
    /// Emit vectors for the seed in HIDM_SEED (default 0).
    Emit {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, out } => {
            let config = scenario::load_config(&config)?;
            let (summary, _) = scenario::run_scenario(config, out.as_deref())?;
            print_json(&summary);
            match (&summary.first_failure, summary.ledgers_intact) {
                (Some(f), _) => Err(CliError::Protocol(f.clone())),
                (None, false) => Err(CliError::Protocol("ledger chain verification failed".into())),
                (None, true) => Ok(()),
            }
        }
        Command::Bench { scheme, scenario, out } => {
            let scheme = scheme.map(|s| s.parse::<Scheme>()).transpose()?;
            let scenario = scenario.map(|s| s.parse::<Scenario>()).transpose()?;
            let report = bench::bench_matrix(scheme, scenario, env_seed()?.unwrap_or(0))?;
            for row in &report.rows {
                eprintln!("{:<11} {:<28} {:>10.2} ms", row.scheme.to_string(), row.scenario.to_string(), row.avg_time_ms);
            }
            match out {
                Some(path) => write_json(&path, &report),
                None => {
                    print_json(&report);
                    Ok(())
                }
            }
        }
        Command::Attack { kind } => {
            let kinds = match kind {
                Some(k) => vec![k.parse::<AttackKind>()?],
                None => AttackKind::ALL.to_vec(),
            };
            let seed = env_seed()?.unwrap_or(0);
            let mut failed = Vec::new();
            for k in kinds {
                let o = attack::run_attack(k, seed)?;
                println!(
                    "{} {}: expected {:?}, observed {:?}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.kind,
                    o.expected,
                    o.observed
                );
                if !o.pass {
                    failed.push(o.kind.to_string());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Protocol(format!("attacks not refused: {}", failed.join(", "))))
            }
        }
        Command::Ledger {
            action: LedgerAction::Verify { file },
        } => {
            let entries = verify_file(&file).map_err(|e| CliError::Protocol(format!("{}: {e}", file.display())))?;
            println!("{}: {} entries, chain intact", file.display(), entries.len());
            Ok(())
        }
        Command::Vectors {
            action: VectorsAction::Emit { out },
        } => {
            let v = vectors::emit(env_seed()?.unwrap_or(0))?;
            match out {
                Some(path) => write_json(&path, &v),
                None => {
                    print_json(&v);
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hidm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
