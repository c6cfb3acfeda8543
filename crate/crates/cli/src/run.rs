//! Experiment execution, provenance records, and replay.
//!
//! Every run emits two artifacts: a CSV (schema versioned in a leading
//! comment line) and a JSON provenance record embedding the config, the
//! library version, and the CSV rows themselves. Replaying a record re-runs
//! the experiment from the recorded config and demands byte-identical rows.

use mechlab::bundle::{bundle_iter, Bundle};
use mechlab::exact::ExactValue;
use mechlab::games::{
    distinguishing_game, goodness_check, identification_game, tie_profit_gap, tie_sampler,
    FixedProbeStrategy, Instance, SamplerOutcome, ScanStrategy, SyntheticHitMechanism,
};
use mechlab::mechanisms::{
    CppMode, CppVcg, FirstPriceGreedy, GreedyAuction, Mechanism, VcgAuction,
};
use mechlab::menu::{bin_histogram, check_structured, extract_menu, find_structured_submenu};
use mechlab::oracle::{dyn_refs, Valuation};
use mechlab::prob::{audit_claim, exact_hypergeometric_tail, ClaimId, TailDirection};
use mechlab::seeds::trial_rng;
use mechlab::valuations::{polar_family, random_polar_with, PolarAdditiveValuation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, MechChoice};

pub const RECORD_SCHEMA: &str = "mechlab-run-v1";
pub const CSV_SCHEMA: &str = "mechlab-csv v1";

/// The JSON provenance record written next to every CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub config: ExperimentConfig,
    pub lib_version: String,
    pub wall_time_ms: u128,
    pub status: RunStatus,
    pub csv: Vec<String>,
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// An invariant violation was discovered mid-run; the witness is the
    /// diagnostic that stopped the experiment.
    Violation { witness: String },
}

pub struct RunOutput {
    pub csv: Vec<String>,
    pub result: Value,
}

/// A violation discovered mid-run, with whatever rows were produced first.
pub struct RunViolation {
    pub witness: String,
    pub partial_csv: Vec<String>,
}

fn header(kind: &str, columns: &str) -> Vec<String> {
    vec![format!("# {CSV_SCHEMA} kind={kind}"), columns.to_string()]
}

fn violation<E: std::fmt::Display>(partial_csv: Vec<String>) -> impl FnOnce(E) -> RunViolation {
    move |e| RunViolation { witness: e.to_string(), partial_csv }
}

fn default_p(n: usize) -> ExactValue {
    ExactValue::ratio(1, n as i64)
}

/// Seeded random polar opponents: opponent `i` draws from trial stream `i`.
fn draw_opponents(
    m: u32,
    count: usize,
    p: &ExactValue,
    seed: u64,
) -> Result<Vec<PolarAdditiveValuation>, RunViolation> {
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            random_polar_with(m, p, &mut rng).map_err(|e| RunViolation {
                witness: e.to_string(),
                partial_csv: Vec::new(),
            })
        })
        .collect()
}

fn build_mechanism(mech: MechChoice, k: Option<u32>) -> Box<dyn Mechanism> {
    match mech {
        MechChoice::Vcg => Box::new(VcgAuction),
        MechChoice::Greedy => Box::new(FirstPriceGreedy),
        MechChoice::CppExact => {
            Box::new(CppVcg { mode: CppMode::Exact, k: k.expect("validated") })
        }
        MechChoice::CppFlex => {
            Box::new(CppVcg { mode: CppMode::Flexible, k: k.expect("validated") })
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, RunViolation> {
    match config {
        ExperimentConfig::Menu { m, n, mech, k, p, seed } => {
            let p = p.clone().unwrap_or_else(|| default_p(*n));
            let opponents = draw_opponents(*m, n - 1, &p, *seed)?;
            let opponent_refs = dyn_refs(&opponents);
            let family = polar_family(*m).map_err(violation(Vec::new()))?;
            let family_refs = dyn_refs(&family);
            let mechanism = build_mechanism(*mech, *k);
            let mut csv = header("menu", "bundle,size,price");
            let menu = extract_menu(mechanism.as_ref(), 0, &opponent_refs, &family_refs)
                .map_err(violation(csv.clone()))?;
            for (bundle, price) in menu.iter() {
                csv.push(format!(
                    "{},{},{}",
                    bundle.to_bitstring(),
                    bundle.len(),
                    price.to_ratio_string()
                ));
            }
            let result = json!({
                "menu": menu,
                "opponents": opponents.iter().map(|o| o.demanded().to_bitstring()).collect::<Vec<_>>(),
            });
            Ok(RunOutput { csv, result })
        }
        ExperimentConfig::Submenu { m, n, mech, k, p, seed } => {
            let p = p.clone().unwrap_or_else(|| default_p(*n));
            let opponents = draw_opponents(*m, n - 1, &p, *seed)?;
            let opponent_refs = dyn_refs(&opponents);
            let family = polar_family(*m).map_err(violation(Vec::new()))?;
            let family_refs = dyn_refs(&family);
            let mechanism = build_mechanism(*mech, *k);
            let mut csv = header("submenu", "size,price_bin,count,selected");
            let menu = extract_menu(mechanism.as_ref(), 0, &opponent_refs, &family_refs)
                .map_err(violation(csv.clone()))?;
            let submenu = find_structured_submenu(&menu, *m).map_err(violation(csv.clone()))?;
            let bins = bin_histogram(&menu, *m);
            for ((size, bin), members) in &bins {
                let selected = submenu
                    .as_ref()
                    .is_some_and(|s| s.common_size() == *size && members.contains(&s.bundles()[0]));
                csv.push(format!("{size},{bin},{},{selected}", members.len()));
            }
            let verified = submenu
                .as_ref()
                .map(|s| check_structured(s.bundles(), &menu, *m).is_none());
            let result = json!({
                "menu_size": menu.len(),
                "submenu": submenu.as_ref().map(|s| {
                    s.bundles().iter().map(|b| b.to_bitstring()).collect::<Vec<_>>()
                }),
                "submenu_size": submenu.as_ref().map(|s| s.len()),
                "verified": verified,
            });
            Ok(RunOutput { csv, result })
        }
        ExperimentConfig::Identify { m, k, submenu_size } => {
            let mut csv = header(
                "identify",
                "m,k,submenu_size,strategy,queries_total,queries_submenu,success",
            );
            let submenu: Vec<Bundle> = bundle_iter(*m, Some(*k))
                .map_err(violation(csv.clone()))?
                .take(*submenu_size)
                .collect();
            if submenu.len() < *submenu_size {
                return Err(RunViolation {
                    witness: format!(
                        "only {} size-{k} bundles exist at m = {m}",
                        submenu.len()
                    ),
                    partial_csv: csv,
                });
            }
            let prices = mechlab::games::cpp_identification_menu(&submenu)
                .map_err(violation(csv.clone()))?;
            let t = mechlab::valuations::StarValuation::default_t(*m);
            let mut strategy = ScanStrategy::new(&submenu, &t);
            let outcome = identification_game(&mut strategy, &submenu, &prices, &t)
                .map_err(violation(csv.clone()))?;
            csv.push(format!(
                "{m},{k},{submenu_size},scan,{},{},{}",
                outcome.queries_total, outcome.queries_submenu, outcome.success
            ));
            let result = serde_json::to_value(&outcome).expect("serializable");
            Ok(RunOutput { csv, result: json!({ "outcome": result }) })
        }
        ExperimentConfig::CppDistinguish { m, epsilon, queries, trials, seed } => {
            let mut csv = header(
                "cpp-distinguish",
                "m,epsilon,q,trials,successes,success_rate,informative_queries,tail_probability,success_cap",
            );
            let strategy = FixedProbeStrategy::random(*m, *queries, *seed);
            let report = distinguishing_game(&strategy, *m, epsilon, *seed, *trials)
                .map_err(violation(csv.clone()))?;
            let root = m.isqrt();
            let threshold = mechlab::valuations::floor_rational_power(*m as u64, epsilon)
                .map_err(violation(csv.clone()))?;
            let threshold = u32::try_from(threshold.clone()).map_err(|_| RunViolation {
                witness: format!("threshold {threshold} overflows"),
                partial_csv: csv.clone(),
            })?;
            let tail = exact_hypergeometric_tail(*m, root, root, threshold, TailDirection::Above)
                .map_err(violation(csv.clone()))?;
            let success_rate = ExactValue::ratio(report.successes as i64, report.trials as i64);
            let cap = ExactValue::ratio(1, 2)
                + ExactValue::from_int(*queries as i64) * &tail / ExactValue::from_int(2);
            csv.push(format!(
                "{m},{},{queries},{trials},{},{},{},{},{}",
                epsilon.to_ratio_string(),
                report.successes,
                success_rate.to_decimal_string(6),
                report.informative_queries,
                tail.to_ratio_string(),
                cap.to_decimal_string(6),
            ));
            let result = json!({
                "report": report,
                "probes": strategy.probes().iter().map(|b| b.to_bitstring()).collect::<Vec<_>>(),
                "tail_probability": tail.to_ratio_string(),
            });
            Ok(RunOutput { csv, result })
        }
        ExperimentConfig::Tie { m, epsilon, q, trials, seed } => {
            let mut csv = header(
                "tie",
                "m,epsilon,q,hit_floor,lower,upper,certified,sampler_reps,sampler_found,sampler_budget",
            );
            let q = q.clone().unwrap_or_else(|| ExactValue::inv_int_pow(*m as u64, 4));
            let t = ExactValue::int_pow(*m as u64, 10);
            let gap = tie_profit_gap(*m, epsilon, &t, &q).map_err(violation(csv.clone()))?;
            let root = m.isqrt();
            let budget = (*m as u64).pow(5);
            let (reps, found) = if *trials > 0 {
                let hit = Bundle::from_items(*m, &(0..root).collect::<Vec<_>>())
                    .map_err(violation(csv.clone()))?;
                let miss = Bundle::from_items(*m, &(root..2 * root).collect::<Vec<_>>())
                    .map_err(violation(csv.clone()))?;
                let mech = SyntheticHitMechanism {
                    hit: hit.clone(),
                    miss,
                    hit_probability: q.clone(),
                };
                let mut found = 0u64;
                for rep in 0..*trials {
                    let outcome: SamplerOutcome =
                        tie_sampler(&mech, &hit, *m, epsilon, budget, seed.wrapping_add(rep))
                            .map_err(violation(csv.clone()))?;
                    if outcome.found.is_some() {
                        found += 1;
                    }
                }
                (*trials, found)
            } else {
                (0, 0)
            };
            csv.push(format!(
                "{m},{},{},{},{},{},{},{reps},{found},{budget}",
                epsilon.to_ratio_string(),
                q.to_ratio_string(),
                gap.hit_floor.to_ratio_string(),
                gap.lower.to_ratio_string(),
                gap.upper.to_ratio_string(),
                gap.certified,
            ));
            let result = json!({ "gap": gap, "sampler_reps": reps, "sampler_found": found });
            Ok(RunOutput { csv, result })
        }
        ExperimentConfig::Audit { claim, m, n, epsilon, trials, seed } => {
            let mut csv = header("audit", "claim_id,m,n,epsilon,exact_or_mc,probability,bound,holds");
            let claim_id = ClaimId::parse(claim).map_err(violation(csv.clone()))?;
            let report = audit_claim(claim_id, *m, *n, epsilon.as_ref(), *trials, *seed)
                .map_err(violation(csv.clone()))?;
            let n_col = n.map(|v| v.to_string()).unwrap_or_default();
            let eps_col = epsilon.as_ref().map(|e| e.to_ratio_string()).unwrap_or_default();
            csv.push(format!(
                "{claim_id},{m},{n_col},{eps_col},exact,{},{},{}",
                report.exact.to_ratio_string(),
                report.bound.to_decimal_string(12),
                report.holds,
            ));
            if let Some(mc) = &report.mc {
                let rate = ExactValue::ratio(mc.successes as i64, mc.trials as i64);
                csv.push(format!(
                    "{claim_id},{m},{n_col},{eps_col},mc,{},{},{}",
                    rate.to_decimal_string(6),
                    report.bound.to_decimal_string(12),
                    report.holds,
                ));
            }
            let result = serde_json::to_value(&report).expect("serializable");
            Ok(RunOutput { csv, result: json!({ "report": result }) })
        }
        ExperimentConfig::Goodness { m, n, mech, alpha, trials, seed, p } => {
            let mut csv = header("goodness", "mech,alpha,m,n,instances,approx_count,beta");
            let p = p.clone().unwrap_or_else(|| ExactValue::ratio(1, 2));
            let alpha = alpha.clone().unwrap_or_else(|| match mech {
                MechChoice::Vcg => ExactValue::one(),
                _ => ExactValue::from_int(2),
            });
            let instances: Vec<Instance> = (0..*trials)
                .map(|i| {
                    let mut rng = trial_rng(*seed, i);
                    (0..*n)
                        .map(|_| {
                            random_polar_with(*m, &p, &mut rng)
                                .map(|v| Box::new(v) as Box<dyn Valuation>)
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()
                .map_err(violation(csv.clone()))?;
            let report = match mech {
                MechChoice::Vcg => goodness_check(&VcgAuction, &instances, &alpha),
                MechChoice::Greedy => goodness_check(&GreedyAuction, &instances, &alpha),
                _ => unreachable!("validated"),
            }
            .map_err(violation(csv.clone()))?;
            csv.push(format!(
                "{},{},{m},{n},{},{},{}",
                mech.as_str(),
                alpha.to_ratio_string(),
                report.instances,
                report.approx_count,
                report.beta().to_ratio_string(),
            ));
            let result = json!({
                "beta": report.beta().to_ratio_string(),
                "verdicts": report.verdicts,
            });
            Ok(RunOutput { csv, result })
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum ReplayOutcome {
    Identical { rows: usize },
    Diverged { row: usize, recorded: String, reproduced: String },
}

/// Re-executes a recorded run and compares CSV rows byte for byte.
pub fn replay(record: &RunRecord) -> Result<ReplayOutcome, String> {
    if record.schema != RECORD_SCHEMA {
        return Err(format!(
            "schema mismatch: record says {:?}, this binary speaks {RECORD_SCHEMA:?}",
            record.schema
        ));
    }
    record.config.validate()?;
    let rerun = run_experiment(&record.config)
        .map_err(|v| format!("replay hit a violation: {}", v.witness))?;
    let rows = record.csv.len().max(rerun.csv.len());
    for i in 0..rows {
        let recorded = record.csv.get(i).cloned().unwrap_or_default();
        let reproduced = rerun.csv.get(i).cloned().unwrap_or_default();
        if recorded != reproduced {
            return Ok(ReplayOutcome::Diverged { row: i, recorded, reproduced });
        }
    }
    Ok(ReplayOutcome::Identical { rows: record.csv.len() })
}
