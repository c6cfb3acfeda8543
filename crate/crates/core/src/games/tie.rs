//! Expected-profit arithmetic and output sampling for truthful-in-expectation
//! public projects.
//!
//! The gap computation compares two expected profits for a bidder holding a
//! target valuation: the menu distribution guaranteed to hit the target often
//! (hit probability at least `1/m^{1/2-eps}`, price at most `sqrt(m)`)
//! against the mechanism's actual output distribution with hit probability
//! `q` and price at least zero. Whenever `q <= 1/m^4` the first strictly
//! exceeds the second, certifying the contradiction that powers the lower
//! bound. The sampler is the constructive side: polynomially many samples of
//! the output distribution expose a high-intersection bundle.

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::exact::{ceil_rational_power, ExactValue};
use crate::oracle::Valuation;
use crate::prob::{exp_neg, Interval, ProbError};
use crate::seeds::trial_rng;
use crate::valuations::floor_rational_power;

use super::GameError;

/// Both sides of the expected-profit comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieGapReport {
    pub m: u32,
    pub epsilon: ExactValue,
    pub q_good: ExactValue,
    /// Certified rational lower bound on the hit probability `1/m^{1/2-eps}`
    /// (exact when `m^{1/2-eps}` is an integer).
    pub hit_floor: ExactValue,
    /// Expected profit the target distribution guarantees.
    pub lower: ExactValue,
    /// Expected profit of an output distribution hitting with probability
    /// `q_good`.
    pub upper: ExactValue,
    /// `lower > upper`: the contradiction is certified at these parameters.
    pub certified: bool,
}

/// Evaluates the two closed-form expected profits in exact arithmetic.
///
/// `1/m^{1/2-eps}` is irrational for most `m`; the lower bound substitutes
/// the certified floor `1/ceil(m^{1/2-eps})`, which can only weaken the lower
/// side, so `certified = true` is sound.
pub fn tie_profit_gap(
    m: u32,
    eps: &ExactValue,
    t: &ExactValue,
    q_good: &ExactValue,
) -> Result<TieGapReport, GameError> {
    let root = m.isqrt();
    if root * root != m || m == 0 {
        return Err(GameError::BadParameter(format!("m = {m} is not a perfect square")));
    }
    if q_good.is_negative() || *q_good > 1 {
        return Err(GameError::BadParameter(format!("q = {q_good} outside [0, 1]")));
    }
    if t.is_zero() || t.is_negative() {
        return Err(GameError::BadParameter("t must be positive".into()));
    }
    let exponent = ExactValue::ratio(1, 2) - eps;
    if exponent.is_negative() {
        return Err(GameError::BadParameter(format!("eps = {eps} exceeds 1/2")));
    }
    let hit_floor = ExactValue::from_bigint(
        ceil_rational_power(m as u64, &exponent)
            .ok_or_else(|| GameError::BadParameter("exponent too large".into()))?,
    )
    .recip();
    let root_v = ExactValue::from_int(root as i64);
    let base = t * &(&root_v - &ExactValue::ratio(1, 2));
    let half_t = t / &ExactValue::from_int(2);
    // lower = (sqrt(m) - 1/2) t + hit * t/2 - sqrt(m)   [price <= sqrt(m)]
    let lower = &base + &(&hit_floor * &half_t) - &root_v;
    // upper = (sqrt(m) - 1/2) t + q * t/2 - 0           [price >= 0]
    let upper = &base + &(q_good * &half_t);
    Ok(TieGapReport {
        m,
        epsilon: eps.clone(),
        q_good: q_good.clone(),
        hit_floor,
        certified: lower > upper,
        lower,
        upper,
    })
}

/// Output of a truthful-in-expectation mechanism: a price on the whole
/// distribution, and the distribution itself as (bundle, probability) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionOutcome {
    pub support: Vec<(Bundle, ExactValue)>,
    pub payment: ExactValue,
}

impl DistributionOutcome {
    /// Probabilities sum to one and are non-negative; support bundles all
    /// have size `k`.
    pub fn validate(&self, k: u32) -> Result<(), GameError> {
        let mut total = ExactValue::zero();
        for (bundle, p) in &self.support {
            if p.is_negative() {
                return Err(GameError::BadDistribution(format!("negative probability {p}")));
            }
            if bundle.len() != k {
                return Err(GameError::BadDistribution(format!(
                    "support bundle {bundle:?} has size {}, expected {k}",
                    bundle.len()
                )));
            }
            total = total + p;
        }
        if total != ExactValue::one() {
            return Err(GameError::BadDistribution(format!("probabilities sum to {total}")));
        }
        Ok(())
    }
}

/// A mechanism whose output is a distribution over size-`k` bundles.
pub trait DistributionMechanism: Sync {
    fn k(&self) -> u32;

    fn run(&self, valuations: &[&dyn Valuation]) -> Result<DistributionOutcome, GameError>;
}

/// Synthetic mechanism: outputs `hit` with the given probability, else
/// `miss`, regardless of the reported valuations.
pub struct SyntheticHitMechanism {
    pub hit: Bundle,
    pub miss: Bundle,
    pub hit_probability: ExactValue,
}

impl DistributionMechanism for SyntheticHitMechanism {
    fn k(&self) -> u32 {
        self.hit.len()
    }

    fn run(&self, _valuations: &[&dyn Valuation]) -> Result<DistributionOutcome, GameError> {
        Ok(DistributionOutcome {
            support: vec![
                (self.hit.clone(), self.hit_probability.clone()),
                (self.miss.clone(), ExactValue::one() - &self.hit_probability),
            ],
            payment: ExactValue::zero(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerOutcome {
    /// First sampled bundle intersecting the target above the threshold.
    pub found: Option<Bundle>,
    pub samples_used: u64,
}

/// Samples the mechanism's output distribution (bidder reporting nothing but
/// the target structure matters only through the mechanism) up to
/// `sample_budget` times, returning the first sample `S` with
/// `|S ∩ target| > floor(m^eps)`.
pub fn tie_sampler(
    mech: &dyn DistributionMechanism,
    target: &Bundle,
    m: u32,
    eps: &ExactValue,
    sample_budget: u64,
    seed: u64,
) -> Result<SamplerOutcome, GameError> {
    if target.universe_size() != m {
        return Err(GameError::BadParameter("target universe mismatch".into()));
    }
    let threshold = floor_rational_power(m as u64, eps)?
        .to_u32()
        .ok_or_else(|| GameError::BadParameter("threshold overflow".into()))?;
    let zero = crate::valuations::ZeroValuation { m };
    let valuations: Vec<&dyn Valuation> = vec![&zero];
    let outcome = mech.run(&valuations)?;
    outcome.validate(mech.k())?;
    // Common denominator turns one uniform integer draw into one exact
    // categorical sample.
    let mut denom = num_bigint::BigInt::from(1u32);
    for (_, p) in &outcome.support {
        denom = num_integer::lcm(denom, p.denom().clone());
    }
    let denom = denom.to_u64().ok_or_else(|| {
        GameError::BadDistribution("support denominators too large for sampling".into())
    })?;
    let weights: Vec<u64> = outcome
        .support
        .iter()
        .map(|(_, p)| {
            (p * &ExactValue::from_int(denom as i64)).numer().to_u64().expect("scaled weight fits")
        })
        .collect();
    let mut rng = trial_rng(seed, 0);
    for sample in 1..=sample_budget {
        let mut draw = rng.gen_range(0..denom);
        let mut chosen = outcome.support.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if draw < *w {
                chosen = i;
                break;
            }
            draw -= w;
        }
        let bundle = &outcome.support[chosen].0;
        if bundle.intersection_len(target) > threshold {
            return Ok(SamplerOutcome { found: Some(bundle.clone()), samples_used: sample });
        }
    }
    Ok(SamplerOutcome { found: None, samples_used: sample_budget })
}

/// Rigorous upper bound on the probability that `budget` independent samples
/// all miss an event of probability `hit`: `(1-hit)^budget <= e^{-hit*budget}`.
pub fn sampler_miss_upper_bound(
    hit: &ExactValue,
    budget: u64,
    digits: u32,
) -> Result<Interval, ProbError> {
    let exponent = hit * &ExactValue::from_bigint(budget.into());
    exp_neg(&exponent, digits)
}
