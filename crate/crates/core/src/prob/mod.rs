//! Exact tail probabilities and rigorous Chernoff-bound comparisons.
//!
//! Binomial and hypergeometric tails are summed exactly as rationals, so a
//! stated bound either certainly holds or certainly fails at the parameters
//! under audit; `e^{-x}` bounds are enclosed in rational intervals.

mod audit;
mod interval;

pub use audit::{
    audit_claim, scan_bound_holds, AuditReport, ClaimId, McEstimate, verify_chernoff,
};
pub use interval::{exp_neg, exp_neg_over, rational_power, Interval, DEFAULT_PRECISION_DIGITS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{binomial, ExactValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProbError {
    #[error("exponent {0} is negative")]
    NegativeExponent(ExactValue),
    #[error("outside the stated hypothesis: {0}")]
    OutOfHypothesis(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("precision budget exhausted before the comparison settled")]
    PrecisionExhausted,
    #[error("unknown claim id {0:?}")]
    UnknownClaim(String),
}

/// Strict tail direction for integer-valued distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailDirection {
    /// `Pr[X > threshold]`
    Above,
    /// `Pr[X < threshold]`
    Below,
}

/// A tail-probability query over one of the two exactly-summable families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum TailQuery {
    Binomial { n: u32, p: ExactValue, threshold: ExactValue, direction: TailDirection },
    Hypergeometric { m: u32, s: u32, t: u32, threshold: u32, direction: TailDirection },
}

impl TailQuery {
    pub fn evaluate(&self) -> Result<ExactValue, ProbError> {
        match self {
            TailQuery::Binomial { n, p, threshold, direction } => {
                exact_binomial_tail(*n, p, threshold, *direction)
            }
            TailQuery::Hypergeometric { m, s, t, threshold, direction } => {
                exact_hypergeometric_tail(*m, *s, *t, *threshold, *direction)
            }
        }
    }
}

/// All `n + 1` binomial point masses `Pr[X = k]`, exactly.
pub fn binomial_pmf(n: u32, p: &ExactValue) -> Result<Vec<ExactValue>, ProbError> {
    if p.is_negative() || *p > 1 {
        return Err(ProbError::BadParameter(format!("p = {p} outside [0, 1]")));
    }
    let q = ExactValue::one() - p;
    let mut masses = Vec::with_capacity(n as usize + 1);
    // pmf(k) = C(n, k) p^k q^(n-k), built by the ratio recurrence.
    let mut mass = q.pow(n as i32);
    if q.is_zero() {
        // p = 1: all mass at n.
        masses.resize(n as usize, ExactValue::zero());
        masses.push(ExactValue::one());
        return Ok(masses);
    }
    let step = p / &q;
    for k in 0..=n {
        masses.push(mass.clone());
        if k < n {
            mass = mass * &step * &ExactValue::ratio((n - k) as i64, (k + 1) as i64);
        }
    }
    Ok(masses)
}

/// Exact binomial tail with a rational threshold and strict comparison.
pub fn exact_binomial_tail(
    n: u32,
    p: &ExactValue,
    threshold: &ExactValue,
    direction: TailDirection,
) -> Result<ExactValue, ProbError> {
    let masses = binomial_pmf(n, p)?;
    let mut total = ExactValue::zero();
    for (k, mass) in masses.iter().enumerate() {
        let k = ExactValue::from_int(k as i64);
        let include = match direction {
            TailDirection::Above => k > *threshold,
            TailDirection::Below => k < *threshold,
        };
        if include {
            total = total + mass;
        }
    }
    Ok(total)
}

/// Exact hypergeometric tail: `T` uniform among size-`t` subsets of an
/// `m`-element universe, `X = |S ∩ T|` for a fixed size-`s` set `S`.
pub fn exact_hypergeometric_tail(
    m: u32,
    s: u32,
    t: u32,
    threshold: u32,
    direction: TailDirection,
) -> Result<ExactValue, ProbError> {
    if s > m || t > m {
        return Err(ProbError::BadParameter(format!("s = {s} or t = {t} exceeds m = {m}")));
    }
    let total = binomial(m as u64, t as u64);
    let mut sum = num_bigint::BigInt::from(0u32);
    for i in 0..=s.min(t) {
        let include = match direction {
            TailDirection::Above => i > threshold,
            TailDirection::Below => i < threshold,
        };
        if include {
            sum += binomial(s as u64, i as u64) * binomial((m - s) as u64, (t - i) as u64);
        }
    }
    Ok(ExactValue::ratio_big(sum, total))
}

/// The stated Chernoff bound `e^{-p m eps^2}` for sums of i.i.d. indicators,
/// as a rigorous enclosure. The same value bounds both tail directions; the
/// direction argument records which one is being bounded.
///
/// This is the formula as printed. It is strictly stronger than the standard
/// multiplicative Chernoff forms and exact tail summation refutes it on part
/// of the parameter space; see [`chernoff_bound_standard`] for the textbook
/// constants that exact checking does confirm.
pub fn chernoff_bound(
    p: &ExactValue,
    m: u32,
    eps: &ExactValue,
    _direction: TailDirection,
    digits: u32,
) -> Result<Interval, ProbError> {
    chernoff_with_divisor(p, m, eps, 1, digits)
}

/// The standard multiplicative Chernoff bounds: `e^{-p m eps^2 / 3}` for the
/// upper tail and `e^{-p m eps^2 / 2}` for the lower tail, for `0 <= eps <= 1`.
pub fn chernoff_bound_standard(
    p: &ExactValue,
    m: u32,
    eps: &ExactValue,
    direction: TailDirection,
    digits: u32,
) -> Result<Interval, ProbError> {
    let divisor = match direction {
        TailDirection::Above => 3,
        TailDirection::Below => 2,
    };
    chernoff_with_divisor(p, m, eps, divisor, digits)
}

fn chernoff_with_divisor(
    p: &ExactValue,
    m: u32,
    eps: &ExactValue,
    divisor: i64,
    digits: u32,
) -> Result<Interval, ProbError> {
    if eps.is_negative() || *eps > 1 {
        return Err(ProbError::OutOfHypothesis(format!("eps = {eps} outside [0, 1]")));
    }
    if p.is_zero() || p.is_negative() || *p >= 1 {
        return Err(ProbError::OutOfHypothesis(format!("p = {p} outside (0, 1)")));
    }
    let exponent =
        p * &ExactValue::from_int(m as i64) * eps * eps / ExactValue::from_int(divisor);
    exp_neg(&exponent, digits)
}
