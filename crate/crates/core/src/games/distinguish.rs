//! The target/flat distinguishing game for exact public projects.
//!
//! Per trial the harness draws a hidden target `T` uniformly among
//! size-`sqrt(m)` bundles and a fair coin deciding whether the strategy
//! faces `v_T` or `v_∅`. The two oracles agree off the size-`sqrt(m)` slice,
//! so a query is informative exactly when it has size `sqrt(m)` and
//! intersects `T` in more than `floor(m^eps)` items — an event whose
//! probability is the exact hypergeometric tail, which is what caps any
//! fixed-budget strategy's success rate near one half.

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::exact::ExactValue;
use crate::oracle::Valuation;
use crate::seeds::trial_rng;
use crate::valuations::{floor_rational_power, FlatValuation, TargetValuation};

use super::GameError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Target,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistinguishMove {
    Query(Bundle),
    Guess(Verdict),
}

/// A deterministic distinguishing strategy: a pure function of the history.
pub trait DistinguishStrategy: Sync {
    fn next_move(&self, history: &[(Bundle, ExactValue)]) -> DistinguishMove;
}

/// Uniformly random size-`k` subset of `{0, .., m-1}` (Floyd's algorithm).
pub fn random_subset_of_size(m: u32, k: u32, rng: &mut ChaCha8Rng) -> Bundle {
    assert!(k <= m);
    let mut items: Vec<u32> = Vec::with_capacity(k as usize);
    for j in m - k..m {
        let candidate = rng.gen_range(0..=j);
        if items.contains(&candidate) {
            items.push(j);
        } else {
            items.push(candidate);
        }
    }
    Bundle::from_items(m, &items).expect("items within universe")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishReport {
    pub trials: u64,
    pub successes: u64,
    pub queries_total: u64,
    /// Queries of size `sqrt(m)` whose intersection with the hidden target
    /// exceeded `floor(m^eps)`, summed over all trials (counted against the
    /// drawn target whichever oracle was faced).
    pub informative_queries: u64,
    pub trials_with_informative_query: u64,
}

impl DistinguishReport {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Runs the distinguishing game for `trials` seeded trials. Per trial the
/// target is drawn first, then the coin; both from the trial's own RNG
/// stream, so results are independent of trial scheduling.
pub fn distinguishing_game(
    strategy: &dyn DistinguishStrategy,
    m: u32,
    eps: &ExactValue,
    seed: u64,
    trials: u64,
) -> Result<DistinguishReport, GameError> {
    let root = m.isqrt();
    if root * root != m || m == 0 {
        return Err(GameError::BadParameter(format!("m = {m} is not a perfect square")));
    }
    let threshold = floor_rational_power(m as u64, eps)?
        .to_u32()
        .ok_or_else(|| GameError::BadParameter("threshold overflow".into()))?;
    let flat = FlatValuation::new(m)?;
    let budget = 1u64 << m.min(62);
    let mut report = DistinguishReport {
        trials,
        successes: 0,
        queries_total: 0,
        informative_queries: 0,
        trials_with_informative_query: 0,
    };
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let target_set = random_subset_of_size(m, root, &mut rng);
        let coin_is_target = rng.gen_range(0..2u8) == 1;
        let target = TargetValuation::new(m, target_set.clone(), eps.clone())?;
        let oracle: &dyn Valuation = if coin_is_target { &target } else { &flat };

        let mut history: Vec<(Bundle, ExactValue)> = Vec::new();
        let mut informative_here = 0u64;
        let verdict = loop {
            if history.len() as u64 >= budget {
                return Err(GameError::BudgetExhausted(budget));
            }
            match strategy.next_move(&history) {
                DistinguishMove::Guess(v) => break v,
                DistinguishMove::Query(q) => {
                    if q.len() == root && q.intersection_len(&target_set) > threshold {
                        informative_here += 1;
                    }
                    let answer = oracle.value(&q);
                    history.push((q, answer));
                }
            }
        };
        report.queries_total += history.len() as u64;
        report.informative_queries += informative_here;
        if informative_here > 0 {
            report.trials_with_informative_query += 1;
        }
        let correct = match verdict {
            Verdict::Target => coin_is_target,
            Verdict::Flat => !coin_is_target,
        };
        if correct {
            report.successes += 1;
        }
    }
    Ok(report)
}

/// Guesses a fixed verdict without querying.
pub struct GuessStrategy(pub Verdict);

impl DistinguishStrategy for GuessStrategy {
    fn next_move(&self, _history: &[(Bundle, ExactValue)]) -> DistinguishMove {
        DistinguishMove::Guess(self.0)
    }
}

/// Queries a fixed probe list; answers `Target` as soon as a probe returns
/// the bonus value `t * sqrt(m)`, `Flat` once the probes are spent.
pub struct FixedProbeStrategy {
    probes: Vec<Bundle>,
    high: ExactValue,
}

impl FixedProbeStrategy {
    pub fn new(m: u32, probes: Vec<Bundle>) -> Self {
        let root = m.isqrt();
        let high = ExactValue::int_pow(m as u64, 10) * ExactValue::from_int(root as i64);
        FixedProbeStrategy { probes, high }
    }

    /// `q` distinct random size-`sqrt(m)` probes drawn from the given seed.
    pub fn random(m: u32, q: usize, seed: u64) -> Self {
        let root = m.isqrt();
        let mut rng = trial_rng(seed, u64::MAX); // stream disjoint from trial streams
        let mut probes: Vec<Bundle> = Vec::with_capacity(q);
        while probes.len() < q {
            let p = random_subset_of_size(m, root, &mut rng);
            if !probes.contains(&p) {
                probes.push(p);
            }
        }
        FixedProbeStrategy::new(m, probes)
    }

    pub fn probes(&self) -> &[Bundle] {
        &self.probes
    }
}

impl DistinguishStrategy for FixedProbeStrategy {
    fn next_move(&self, history: &[(Bundle, ExactValue)]) -> DistinguishMove {
        if history.iter().any(|(_, a)| *a == self.high) {
            return DistinguishMove::Guess(Verdict::Target);
        }
        if history.len() < self.probes.len() {
            DistinguishMove::Query(self.probes[history.len()].clone())
        } else {
            DistinguishMove::Guess(Verdict::Flat)
        }
    }
}

/// Queries every size-`sqrt(m)` bundle; full information, always correct.
pub struct ExhaustiveSliceStrategy {
    slice: Vec<Bundle>,
    high: ExactValue,
}

impl ExhaustiveSliceStrategy {
    pub fn new(m: u32) -> Result<Self, GameError> {
        let root = m.isqrt();
        let slice = crate::bundle::bundle_iter(m, Some(root))?.collect();
        let high = ExactValue::int_pow(m as u64, 10) * ExactValue::from_int(root as i64);
        Ok(ExhaustiveSliceStrategy { slice, high })
    }
}

impl DistinguishStrategy for ExhaustiveSliceStrategy {
    fn next_move(&self, history: &[(Bundle, ExactValue)]) -> DistinguishMove {
        if history.iter().any(|(_, a)| *a == self.high) {
            return DistinguishMove::Guess(Verdict::Target);
        }
        if history.len() < self.slice.len() {
            DistinguishMove::Query(self.slice[history.len()].clone())
        } else {
            DistinguishMove::Guess(Verdict::Flat)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{exact_hypergeometric_tail, TailDirection};
    use std::collections::HashMap;

    #[test]
    fn random_subsets_are_uniform_enough() {
        // All C(4,2) = 6 subsets should appear with equal frequency.
        let mut counts: HashMap<Bundle, u64> = HashMap::new();
        let trials = 60_000u64;
        for t in 0..trials {
            let mut rng = trial_rng(11, t);
            *counts.entry(random_subset_of_size(4, 2, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let expect = trials as f64 / 6.0;
        // 5 sigma on a binomial count with p = 1/6.
        let sigma = (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (bundle, count) in counts {
            assert!(
                (count as f64 - expect).abs() <= 5.0 * sigma,
                "{bundle:?} appeared {count} times"
            );
        }
    }

    #[test]
    fn blind_guess_wins_half_the_time() {
        let eps = ExactValue::ratio(1, 4);
        let report =
            distinguishing_game(&GuessStrategy(Verdict::Flat), 16, &eps, 5, 40_000).unwrap();
        assert_eq!(report.queries_total, 0);
        let sigma = (0.25f64 / report.trials as f64).sqrt();
        assert!((report.success_rate() - 0.5).abs() <= 4.0 * sigma, "{}", report.success_rate());
    }

    #[test]
    fn probe_success_respects_the_hypergeometric_cap() {
        // With q fixed probes, Pr[success] <= 1/2 + q * h / 2 where h is the
        // exact tail 49/1820 at m = 16, eps = 1/4.
        let m = 16;
        let eps = ExactValue::ratio(1, 4);
        let h = exact_hypergeometric_tail(16, 4, 4, 2, TailDirection::Above).unwrap();
        assert_eq!(h, ExactValue::ratio(49, 1820));
        let trials = 30_000u64;
        for q in [1usize, 5, 10] {
            let strategy = FixedProbeStrategy::random(m, q, 99);
            let report = distinguishing_game(&strategy, m, &eps, 1234, trials).unwrap();
            // Early Target verdicts stop probing, so at most q per trial.
            assert!(report.queries_total <= trials * q as u64);
            let cap = 0.5 + q as f64 * h.to_f64() / 2.0;
            let sigma = (0.25f64 / trials as f64).sqrt();
            assert!(
                report.success_rate() <= cap + 3.0 * sigma,
                "q = {q}: rate {} cap {cap}",
                report.success_rate()
            );
        }
    }

    #[test]
    fn informative_queries_track_the_tail_probability() {
        let m = 16;
        let eps = ExactValue::ratio(1, 4);
        let q = 5usize;
        let trials = 30_000u64;
        let strategy = FixedProbeStrategy::random(m, q, 7);
        let report = distinguishing_game(&strategy, m, &eps, 77, trials).unwrap();
        // Expected informative fraction per probe is the exact tail h; the
        // per-trial count is Binomial(q, h)-like (probes nearly disjoint).
        let h = 49.0 / 1820.0;
        let expect = q as f64 * h * trials as f64;
        let sigma = (trials as f64 * q as f64 * h * (1.0 - h)).sqrt();
        assert!(
            (report.informative_queries as f64 - expect).abs() <= 5.0 * sigma,
            "informative {} expect {expect}",
            report.informative_queries
        );
    }

    #[test]
    fn exhaustive_slice_always_wins() {
        let eps = ExactValue::ratio(1, 4);
        let report =
            distinguishing_game(&ExhaustiveSliceStrategy::new(4).unwrap(), 4, &eps, 3, 500)
                .unwrap();
        assert_eq!(report.successes, report.trials);
    }

    #[test]
    fn non_square_universe_is_rejected() {
        let eps = ExactValue::ratio(1, 4);
        let err = distinguishing_game(&GuessStrategy(Verdict::Flat), 8, &eps, 0, 10).unwrap_err();
        assert!(matches!(err, GameError::BadParameter(_)));
    }
}
