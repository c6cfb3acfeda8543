//! Batch experiment front-end.
//!
//! Every run writes a CSV to `--out` and a JSON provenance record to
//! `<out>.json`; `replay <record.json>` re-executes a record and verifies the
//! CSV reproduces byte-identically. Exit codes: 0 success, 1 invalid
//! configuration (diagnostics as JSON on stderr), 2 invariant violation or
//! replay divergence (witness in the record / report).
//!
//! The enumeration cap (default 24) can be raised or lowered with the
//! `MECHLAB_ENUM_CAP` environment variable.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mechlab::exact::ExactValue;

use config::{ExperimentConfig, MechChoice};
use run::{replay, run_experiment, ReplayOutcome, RunRecord, RunStatus, RECORD_SCHEMA};

/// Accepts `3`, `1/4`, or `0.25`.
fn parse_exact(s: &str) -> Result<ExactValue, String> {
    if let Some((whole, frac)) = s.split_once('.') {
        if !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit()) {
            let scale = ExactValue::int_pow(10, frac.len() as u32);
            let whole: i64 = if whole.is_empty() {
                0
            } else {
                whole.parse().map_err(|_| format!("bad decimal {s:?}"))?
            };
            let frac_num: i64 = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
            let sign = if s.trim_start().starts_with('-') { -1 } else { 1 };
            return Ok(ExactValue::from_int(whole)
                + ExactValue::from_int(sign * frac_num) / scale);
        }
    }
    ExactValue::parse_ratio(s).map_err(|e| e.to_string())
}

#[derive(Parser)]
#[command(
    name = "mechlab",
    version,
    about = "exact testbed for auction menus, adversary games, and query lower bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// CSV output path; the JSON provenance record lands at "<out>.json".
    #[arg(long)]
    out: PathBuf,
    /// Load the full experiment configuration from a JSON file (must match
    /// this subcommand's kind); other flags are then ignored.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MenuArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    m: u32,
    /// Total bidders including the menu's player (player 0).
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value_t = MechChoice::Vcg)]
    mech: MechChoice,
    /// Project size for the cpp mechanisms.
    #[arg(long)]
    k: Option<u32>,
    /// Demand probability for the random polar opponents (default 1/n).
    #[arg(long, value_parser = parse_exact)]
    p: Option<ExactValue>,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct IdentifyArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 4)]
    submenu_size: usize,
}

#[derive(Args)]
struct CppDistinguishArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    m: u32,
    #[arg(long, value_parser = parse_exact)]
    epsilon: ExactValue,
    /// Number of fixed probes the strategy spends per trial.
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct TieArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    m: u32,
    #[arg(long, value_parser = parse_exact)]
    epsilon: ExactValue,
    /// Output-distribution hit probability (default 1/m^4).
    #[arg(long, value_parser = parse_exact)]
    q: Option<ExactValue>,
    /// Sampler repetitions on the synthetic mechanism; 0 skips the sampler.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    out: OutArgs,
    /// One of 3.7, 3.8, 4.4, O-4.
    #[arg(long)]
    claim: String,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_parser = parse_exact)]
    epsilon: Option<ExactValue>,
    /// Monte Carlo cross-check trials; 0 skips MC.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GoodnessArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value_t = MechChoice::Vcg)]
    mech: MechChoice,
    /// Approximation factor to certify (default 1 for vcg, 2 for greedy).
    #[arg(long, value_parser = parse_exact)]
    alpha: Option<ExactValue>,
    /// Number of random polar instances.
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_parser = parse_exact)]
    p: Option<ExactValue>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a player's menu against seeded random polar opponents.
    Menu(MenuArgs),
    /// Extract a menu and locate its most congested structured submenu.
    Submenu(MenuArgs),
    /// Play the hidden-star identification game with the scan strategy.
    Identify(IdentifyArgs),
    /// Run the target/flat distinguishing game for exact public projects.
    CppDistinguish(CppDistinguishArgs),
    /// Evaluate the truthful-in-expectation profit gap and output sampler.
    Tie(TieArgs),
    /// Audit a probabilistic claim at finite parameters.
    Audit(AuditArgs),
    /// Goodness-check a mechanism over seeded random polar instances.
    Goodness(GoodnessArgs),
    /// Re-execute a recorded run and verify the CSV reproduces byte-exactly.
    Replay {
        /// Path to a provenance record produced by a previous run.
        record: PathBuf,
    },
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": "invalid-config", "detail": msg }));
    ExitCode::from(1)
}

fn load_config(path: &Path, kind: &str) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| format!("cannot parse config: {e}"))?;
    if config.kind() != kind {
        return Err(format!("config kind {:?} does not match subcommand {kind:?}", config.kind()));
    }
    Ok(config)
}

fn resolve_config(
    out: &OutArgs,
    kind: &str,
    from_flags: impl FnOnce() -> ExperimentConfig,
) -> Result<ExperimentConfig, String> {
    let config = match &out.config {
        Some(path) => load_config(path, kind)?,
        None => from_flags(),
    };
    config.validate()?;
    Ok(config)
}

fn execute(config: ExperimentConfig, out_path: &Path) -> ExitCode {
    let started = Instant::now();
    let outcome = run_experiment(&config);
    let wall_time_ms = started.elapsed().as_millis();
    let (status, csv, result, code) = match outcome {
        Ok(output) => (RunStatus::Ok, output.csv, output.result, ExitCode::SUCCESS),
        Err(violation) => {
            eprintln!("invariant violation: {}", violation.witness);
            (
                RunStatus::Violation { witness: violation.witness },
                violation.partial_csv,
                serde_json::Value::Null,
                ExitCode::from(2),
            )
        }
    };
    let record = RunRecord {
        schema: RECORD_SCHEMA.to_string(),
        config,
        lib_version: mechlab::VERSION.to_string(),
        wall_time_ms,
        status,
        csv,
        result,
    };
    let mut csv_text = record.csv.join("\n");
    csv_text.push('\n');
    if let Err(e) = std::fs::write(out_path, csv_text) {
        return config_error(&format!("cannot write {}: {e}", out_path.display()));
    }
    let record_path = record_path_for(out_path);
    let json = serde_json::to_string_pretty(&record).expect("serializable record");
    if let Err(e) = std::fs::write(&record_path, json) {
        return config_error(&format!("cannot write {}: {e}", record_path.display()));
    }
    code
}

fn record_path_for(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_os_string();
    os.push(".json");
    PathBuf::from(os)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Menu(args) => {
            let config = resolve_config(&args.out, "menu", || ExperimentConfig::Menu {
                m: args.m,
                n: args.n,
                mech: args.mech,
                k: args.k,
                p: args.p.clone(),
                seed: args.seed,
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Submenu(args) => {
            let config = resolve_config(&args.out, "submenu", || ExperimentConfig::Submenu {
                m: args.m,
                n: args.n,
                mech: args.mech,
                k: args.k,
                p: args.p.clone(),
                seed: args.seed,
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Identify(args) => {
            let config = resolve_config(&args.out, "identify", || ExperimentConfig::Identify {
                m: args.m,
                k: args.k,
                submenu_size: args.submenu_size,
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::CppDistinguish(args) => {
            let config = resolve_config(&args.out, "cpp-distinguish", || {
                ExperimentConfig::CppDistinguish {
                    m: args.m,
                    epsilon: args.epsilon.clone(),
                    queries: args.queries,
                    trials: args.trials,
                    seed: args.seed,
                }
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Tie(args) => {
            let config = resolve_config(&args.out, "tie", || ExperimentConfig::Tie {
                m: args.m,
                epsilon: args.epsilon.clone(),
                q: args.q.clone(),
                trials: args.trials,
                seed: args.seed,
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Audit(args) => {
            let config = resolve_config(&args.out, "audit", || ExperimentConfig::Audit {
                claim: args.claim.clone(),
                m: args.m,
                n: args.n,
                epsilon: args.epsilon.clone(),
                trials: args.trials,
                seed: args.seed,
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Goodness(args) => {
            let config = resolve_config(&args.out, "goodness", || ExperimentConfig::Goodness {
                m: args.m,
                n: args.n,
                mech: args.mech,
                alpha: args.alpha.clone(),
                trials: args.trials,
                seed: args.seed,
                p: args.p.clone(),
            });
            match config {
                Ok(config) => execute(config, &args.out.out),
                Err(e) => config_error(&e),
            }
        }
        Command::Replay { record } => {
            let text = match std::fs::read_to_string(&record) {
                Ok(t) => t,
                Err(e) => return config_error(&format!("cannot read record: {e}")),
            };
            let record: RunRecord = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => return config_error(&format!("schema mismatch: {e}")),
            };
            match replay(&record) {
                Ok(ReplayOutcome::Identical { rows }) => {
                    println!("replay ok: {rows} CSV rows reproduced byte-identically");
                    ExitCode::SUCCESS
                }
                Ok(ReplayOutcome::Diverged { row, recorded, reproduced }) => {
                    eprintln!("replay diverged at row {row}:");
                    eprintln!("  recorded:   {recorded}");
                    eprintln!("  reproduced: {reproduced}");
                    ExitCode::from(2)
                }
                Err(e) => config_error(&e),
            }
        }
    }
}
