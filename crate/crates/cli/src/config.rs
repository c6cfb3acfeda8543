//! Experiment configurations: the JSON-loadable description of one batch run.

use mechlab::exact::ExactValue;
use serde::{Deserialize, Serialize};

/// Which mechanism a menu/goodness experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MechChoice {
    /// Brute-force VCG with Clarke payments.
    Vcg,
    /// Greedy allocation charged at face value (deliberately not truthful).
    Greedy,
    /// Public project of size exactly k, VCG-priced.
    CppExact,
    /// Public project of size at most k, VCG-priced.
    CppFlex,
}

impl MechChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            MechChoice::Vcg => "vcg",
            MechChoice::Greedy => "greedy",
            MechChoice::CppExact => "cpp-exact",
            MechChoice::CppFlex => "cpp-flex",
        }
    }
}

/// One experiment, fully described: the seed plus this record replays the
/// run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    /// Extract the menu of player 0 against seeded random polar opponents.
    Menu { m: u32, n: usize, mech: MechChoice, k: Option<u32>, p: Option<ExactValue>, seed: u64 },
    /// Extract a menu, bin it, and report the structured-submenu discovery.
    Submenu {
        m: u32,
        n: usize,
        mech: MechChoice,
        k: Option<u32>,
        p: Option<ExactValue>,
        seed: u64,
    },
    /// Run the hidden-star identification game with the scan strategy.
    Identify { m: u32, k: u32, submenu_size: usize },
    /// Run the target/flat distinguishing game with fixed random probes.
    CppDistinguish { m: u32, epsilon: ExactValue, queries: usize, trials: u64, seed: u64 },
    /// Evaluate the expected-profit gap; optionally drive the output sampler
    /// on a synthetic mechanism for `trials` seeded repetitions.
    Tie { m: u32, epsilon: ExactValue, q: Option<ExactValue>, trials: u64, seed: u64 },
    /// Audit one probabilistic claim at finite parameters.
    Audit {
        claim: String,
        m: u32,
        n: Option<u32>,
        epsilon: Option<ExactValue>,
        trials: u64,
        seed: u64,
    },
    /// Goodness check of a mechanism over seeded random polar instances.
    Goodness {
        m: u32,
        n: usize,
        mech: MechChoice,
        alpha: Option<ExactValue>,
        trials: u64,
        seed: u64,
        p: Option<ExactValue>,
    },
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Menu { .. } => "menu",
            ExperimentConfig::Submenu { .. } => "submenu",
            ExperimentConfig::Identify { .. } => "identify",
            ExperimentConfig::CppDistinguish { .. } => "cpp-distinguish",
            ExperimentConfig::Tie { .. } => "tie",
            ExperimentConfig::Audit { .. } => "audit",
            ExperimentConfig::Goodness { .. } => "goodness",
        }
    }

    /// Structural validation, before anything runs.
    pub fn validate(&self) -> Result<(), String> {
        let check_prob = |p: &Option<ExactValue>| -> Result<(), String> {
            if let Some(p) = p {
                if p.is_negative() || *p > 1 {
                    return Err(format!("p = {p} outside [0, 1]"));
                }
            }
            Ok(())
        };
        match self {
            ExperimentConfig::Menu { m, n, mech, k, p, .. }
            | ExperimentConfig::Submenu { m, n, mech, k, p, .. } => {
                if *m == 0 || *n < 1 {
                    return Err("need m >= 1 and n >= 1".into());
                }
                if matches!(mech, MechChoice::CppExact | MechChoice::CppFlex) && k.is_none() {
                    return Err("cpp mechanisms need --k".into());
                }
                check_prob(p)
            }
            ExperimentConfig::Identify { m, k, submenu_size } => {
                if *k == 0 || k > m {
                    return Err(format!("need 1 <= k <= m, got k = {k}, m = {m}"));
                }
                if *submenu_size == 0 {
                    return Err("submenu size must be positive".into());
                }
                Ok(())
            }
            ExperimentConfig::CppDistinguish { m, queries, trials, .. } => {
                let root = m.isqrt();
                if root * root != *m || *m == 0 {
                    return Err(format!("m = {m} is not a perfect square"));
                }
                if *queries == 0 || *trials == 0 {
                    return Err("need queries >= 1 and trials >= 1".into());
                }
                Ok(())
            }
            ExperimentConfig::Tie { m, q, .. } => {
                let root = m.isqrt();
                if root * root != *m || *m == 0 {
                    return Err(format!("m = {m} is not a perfect square"));
                }
                check_prob(q)
            }
            ExperimentConfig::Audit { claim, m, .. } => {
                mechlab::prob::ClaimId::parse(claim).map_err(|e| e.to_string())?;
                if *m == 0 {
                    return Err("need m >= 1".into());
                }
                Ok(())
            }
            ExperimentConfig::Goodness { m, n, mech, alpha, trials, p, .. } => {
                if *m == 0 || *n < 1 || *trials == 0 {
                    return Err("need m >= 1, n >= 1, trials >= 1".into());
                }
                if matches!(mech, MechChoice::CppExact | MechChoice::CppFlex) {
                    return Err("goodness checks auction allocation rules only".into());
                }
                if let Some(a) = alpha {
                    if *a < 1 {
                        return Err(format!("alpha = {a} below 1"));
                    }
                }
                check_prob(p)
            }
        }
    }
}
