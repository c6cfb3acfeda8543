//! Literal audits of the catalogued probabilistic claims at finite
//! parameters.
//!
//! Each audited claim reduces to an exact binomial computation, so the
//! stated bound either certainly holds or certainly fails at the given
//! `(m, n, eps)`. Bounds are asymptotic; failing at small parameters is a
//! report outcome, not an error, and the scan helper documents where each
//! bound starts or stops holding.

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exact::ExactValue;
use crate::seeds::trial_rng;

use super::interval::{exp_neg, exp_neg_over, rational_power, Interval, DEFAULT_PRECISION_DIGITS};
use super::{chernoff_bound, exact_binomial_tail, ProbError, TailDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClaimId {
    /// Items demanded by at least one bidder exceed `(1 - 1.01(1-p)^n) m`
    /// with probability at most `e^{-m/300}` (p = 1/n).
    #[serde(rename = "3.7")]
    Claim37,
    /// A random polar valuation has `v(S) <= 2p|S| + 1/m^2` with probability
    /// at least `1 - e^{-p|S|}`, for every `|S| > pm/n` (p = 1/n).
    #[serde(rename = "3.8")]
    Claim38,
    /// A random polar valuation (p = 1/sqrt(m)) on a size-sqrt(m) bundle has
    /// `v(S) >= m^eps` with probability at least `1 - e^{-m^{2 eps}}`.
    #[serde(rename = "4.4")]
    Claim44,
    /// Some size-sqrt(m) bundle reaches value `sqrt(m)/2` with probability at
    /// least `1 - e^{-m^{1/4}}` (p = 1/sqrt(m)).
    #[serde(rename = "O-4")]
    OEvent4,
}

impl ClaimId {
    pub fn parse(s: &str) -> Result<Self, ProbError> {
        match s {
            "3.7" => Ok(ClaimId::Claim37),
            "3.8" => Ok(ClaimId::Claim38),
            "4.4" => Ok(ClaimId::Claim44),
            "O-4" | "O4" | "o-4" => Ok(ClaimId::OEvent4),
            other => Err(ProbError::UnknownClaim(other.to_string())),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimId::Claim37 => "3.7",
            ClaimId::Claim38 => "3.8",
            ClaimId::Claim44 => "4.4",
            ClaimId::OEvent4 => "O-4",
        }
    }
}

impl std::fmt::Display for ClaimId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
}

impl McEstimate {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Outcome of auditing one claim at finite parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub claim: ClaimId,
    pub m: u32,
    pub n: Option<u32>,
    pub epsilon: Option<ExactValue>,
    /// Exact probability of the claim's event.
    pub exact: ExactValue,
    /// Enclosure of the claim's `e^{-...}` bound value.
    pub bound: Interval,
    /// Whether the bound upper-bounds the event probability (Claim 3.7) or
    /// lower-bounds it via `1 - bound` (the other three).
    pub bound_is_upper: bool,
    /// The claim's inequality, decided rigorously at these parameters.
    pub holds: bool,
    /// Set when the claim applies the Chernoff form outside `0 <= eps <= 1`.
    pub hypothesis_note: Option<String>,
    pub mc: Option<McEstimate>,
    pub detail: String,
}

/// `compared <= bound`? The enclosure is refined until the comparison is
/// certain; `e^{-x}` is irrational for rational `x > 0`, so this terminates.
fn decide_at_most(
    compared: &ExactValue,
    mut bound: Interval,
    refine: impl Fn(u32) -> Result<Interval, ProbError>,
) -> Result<(bool, Interval), ProbError> {
    let mut digits = DEFAULT_PRECISION_DIGITS;
    for _ in 0..6 {
        if bound.certainly_at_least(compared) {
            return Ok((true, bound));
        }
        if bound.certainly_at_most(compared) {
            return Ok((false, bound));
        }
        digits *= 2;
        bound = refine(digits)?;
    }
    Err(ProbError::PrecisionExhausted)
}

fn require_n(n: Option<u32>) -> Result<u32, ProbError> {
    match n {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(ProbError::BadParameter("claim needs n >= 1".into())),
    }
}

fn require_eps(eps: Option<&ExactValue>) -> Result<ExactValue, ProbError> {
    match eps {
        Some(e) if !e.is_negative() => Ok(e.clone()),
        _ => Err(ProbError::BadParameter("claim needs eps >= 0".into())),
    }
}

fn require_square(m: u32) -> Result<u32, ProbError> {
    let r = m.isqrt();
    if r * r == m && m > 0 {
        Ok(r)
    } else {
        Err(ProbError::BadParameter(format!("m = {m} is not a perfect square")))
    }
}

/// Polar value of a bundle with `d` demanded items out of `size`, in a
/// universe of `m` items: `d + (size - d)/m^3`.
fn polar_bundle_value(d: u32, size: u32, m: u32) -> ExactValue {
    ExactValue::from_int(d as i64)
        + ExactValue::from_int((size - d) as i64) * ExactValue::inv_int_pow(m as u64, 3)
}

/// Smallest demanded count `d <= size` with `value >= target`, where
/// `target` may be irrational `m^(a/b)` (compared via b-th powers).
fn min_demanded_reaching_power(size: u32, m: u32, base_pow: &ExactValue) -> Option<u32> {
    // base_pow encodes (a, b) as the rational exponent itself.
    let a = base_pow.numer().to_u32()?;
    let b = base_pow.denom().to_u32()?;
    let target_pow = ExactValue::int_pow(m as u64, a);
    (0..=size).find(|&d| {
        let v = polar_bundle_value(d, size, m);
        v.pow(b as i32) >= target_pow
    })
}

fn mc_binomial_event(
    trials: u64,
    seed: u64,
    draws: u32,
    p_num: u64,
    p_den: u64,
    event: impl Fn(u32) -> bool,
) -> Option<McEstimate> {
    if trials == 0 {
        return None;
    }
    let mut successes = 0;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut d = 0;
        for _ in 0..draws {
            if rng.gen_range(0..p_den) < p_num {
                d += 1;
            }
        }
        if event(d) {
            successes += 1;
        }
    }
    Some(McEstimate { trials, successes })
}

/// Audits one claim: computes its event probability exactly, compares it
/// against the stated bound in rigorous interval arithmetic, and (when
/// `trials > 0`) cross-checks with seeded Monte Carlo.
pub fn audit_claim(
    claim: ClaimId,
    m: u32,
    n: Option<u32>,
    eps: Option<&ExactValue>,
    trials: u64,
    seed: u64,
) -> Result<AuditReport, ProbError> {
    if m == 0 {
        return Err(ProbError::BadParameter("m = 0".into()));
    }
    let digits = DEFAULT_PRECISION_DIGITS;
    match claim {
        ClaimId::Claim37 => {
            let n = require_n(n)?;
            let p = ExactValue::ratio(1, n as i64);
            let undemanded = (ExactValue::one() - &p).pow(n as i32);
            let p_any = ExactValue::one() - &undemanded;
            let threshold = ExactValue::from_int(m as i64)
                * (ExactValue::one() - ExactValue::ratio(101, 100) * &undemanded);
            let exact = exact_binomial_tail(m, &p_any, &threshold, TailDirection::Above)?;
            let exponent = ExactValue::ratio(m as i64, 300);
            let (holds, bound) =
                decide_at_most(&exact, exp_neg(&exponent, digits)?, |d| exp_neg(&exponent, d))?;
            let mc = {
                let num = p.numer().to_u64().unwrap();
                let den = p.denom().to_u64().unwrap();
                if trials == 0 {
                    None
                } else {
                    let mut successes = 0;
                    for trial in 0..trials {
                        let mut rng = trial_rng(seed, trial);
                        let mut demanded_items = 0u32;
                        for _ in 0..m {
                            let any = (0..n).any(|_| rng.gen_range(0..den) < num);
                            if any {
                                demanded_items += 1;
                            }
                        }
                        if ExactValue::from_int(demanded_items as i64) > threshold {
                            successes += 1;
                        }
                    }
                    Some(McEstimate { trials, successes })
                }
            };
            Ok(AuditReport {
                claim,
                m,
                n: Some(n),
                epsilon: None,
                exact,
                bound,
                bound_is_upper: true,
                holds,
                hypothesis_note: None,
                mc,
                detail: format!("threshold {threshold} on Bin({m}, {p_any})"),
            })
        }
        ClaimId::Claim38 => {
            let n = require_n(n)?;
            let p = ExactValue::ratio(1, n as i64);
            let min_size = m / (n * n); // sizes strictly above pm/n = m/n^2
            if min_size + 1 > m {
                return Err(ProbError::BadParameter(format!(
                    "no bundle sizes exceed m/n^2 = {min_size} at m = {m}"
                )));
            }
            let one_minus = ExactValue::one() - ExactValue::inv_int_pow(m as u64, 3);
            // Scan every admissible size; report the first failure, else the
            // largest size.
            let mut reported: Option<(u32, ExactValue, Interval, bool)> = None;
            for s in min_size + 1..=m {
                let cutoff = (ExactValue::from_int(2) * &p * ExactValue::from_int(s as i64)
                    + ExactValue::inv_int_pow(m as u64, 2)
                    - ExactValue::from_int(s as i64) * ExactValue::inv_int_pow(m as u64, 3))
                    / &one_minus;
                let good =
                    ExactValue::one() - exact_binomial_tail(s, &p, &cutoff, TailDirection::Above)?;
                let fail_prob = ExactValue::one() - &good;
                let exponent = &p * &ExactValue::from_int(s as i64);
                let (holds, bound) = decide_at_most(
                    &fail_prob,
                    exp_neg(&exponent, digits)?,
                    |d| exp_neg(&exponent, d),
                )?;
                let is_last = s == m;
                if !holds || is_last {
                    reported = Some((s, good, bound, holds));
                    if !holds {
                        break;
                    }
                }
            }
            let (s, good, bound, holds) = reported.expect("size range nonempty");
            let cutoff = (ExactValue::from_int(2) * &p * ExactValue::from_int(s as i64)
                + ExactValue::inv_int_pow(m as u64, 2)
                - ExactValue::from_int(s as i64) * ExactValue::inv_int_pow(m as u64, 3))
                / &one_minus;
            let mc = mc_binomial_event(
                trials,
                seed,
                s,
                p.numer().to_u64().unwrap(),
                p.denom().to_u64().unwrap(),
                |d| ExactValue::from_int(d as i64) <= cutoff,
            );
            Ok(AuditReport {
                claim,
                m,
                n: Some(n),
                epsilon: None,
                exact: good,
                bound,
                bound_is_upper: false,
                holds,
                hypothesis_note: None,
                mc,
                detail: format!("worst size |S| = {s}, demanded cutoff {cutoff}"),
            })
        }
        ClaimId::Claim44 => {
            let root = require_square(m)?;
            let eps = require_eps(eps)?;
            let d_star = min_demanded_reaching_power(root, m, &eps);
            let exact = match d_star {
                None => ExactValue::zero(),
                Some(0) => ExactValue::one(),
                Some(d) => {
                    let p = ExactValue::ratio(1, root as i64);
                    exact_binomial_tail(
                        root,
                        &p,
                        &ExactValue::from_int(d as i64 - 1),
                        TailDirection::Above,
                    )?
                }
            };
            let two_eps = &eps * &ExactValue::from_int(2);
            let refine = |d: u32| -> Result<Interval, ProbError> {
                exp_neg_over(&rational_power(m as u64, &two_eps, d)?, d)
            };
            let fail_prob = ExactValue::one() - &exact;
            let (holds, bound) = decide_at_most(&fail_prob, refine(digits)?, refine)?;
            // Chernoff is applied with multiplicative deviation m^eps against
            // mean 1; flag when that exceeds the 1 + eps <= 2 hypothesis.
            let a = eps.numer().to_u32().ok_or(ProbError::PrecisionExhausted)?;
            let b = eps.denom().to_u32().ok_or(ProbError::PrecisionExhausted)?;
            let out_of_range =
                num_bigint::BigInt::from(m).pow(a) > num_bigint::BigInt::from(2u32).pow(b);
            let hypothesis_note = out_of_range.then(|| {
                format!("deviation m^eps = m^{eps} exceeds twice the mean; the e^(-pm eps^2) form's hypothesis 0 <= eps <= 1 does not cover it")
            });
            let mc = mc_binomial_event(trials, seed, root, 1, root as u64, |d| {
                d_star.is_some_and(|d_star| d >= d_star)
            });
            Ok(AuditReport {
                claim,
                m,
                n: None,
                epsilon: Some(eps),
                exact,
                bound,
                bound_is_upper: false,
                holds,
                hypothesis_note,
                mc,
                detail: format!("needs {d_star:?} demanded of sqrt(m) = {root}"),
            })
        }
        ClaimId::OEvent4 => {
            let root = require_square(m)?;
            let half_root = ExactValue::ratio(root as i64, 2);
            // Best size-root bundle takes min(D, root) demanded items.
            let d_star = (0..=root)
                .find(|&d| polar_bundle_value(d, root, m) >= half_root)
                .expect("d = root always reaches sqrt(m) >= sqrt(m)/2");
            let p = ExactValue::ratio(1, root as i64);
            let exact = if d_star == 0 {
                ExactValue::one()
            } else {
                exact_binomial_tail(
                    m,
                    &p,
                    &ExactValue::from_int(d_star as i64 - 1),
                    TailDirection::Above,
                )?
            };
            let quarter = ExactValue::ratio(1, 4);
            let refine = |d: u32| -> Result<Interval, ProbError> {
                exp_neg_over(&rational_power(m as u64, &quarter, d)?, d)
            };
            let fail_prob = ExactValue::one() - &exact;
            let (holds, bound) = decide_at_most(&fail_prob, refine(digits)?, refine)?;
            let mc = mc_binomial_event(trials, seed, m, 1, root as u64, |d| d >= d_star);
            Ok(AuditReport {
                claim,
                m,
                n: None,
                epsilon: None,
                exact,
                bound,
                bound_is_upper: false,
                holds,
                hypothesis_note: None,
                mc,
                detail: format!("needs {d_star} demanded overall, p = 1/{root}"),
            })
        }
    }
}

/// Audits a claim across a range of `m`, returning `(m, holds)` per valid
/// parameter point; invalid points (e.g. non-squares for Claim 4.4) are
/// skipped. This is how bound crossovers get documented.
pub fn scan_bound_holds(
    claim: ClaimId,
    m_values: impl IntoIterator<Item = u32>,
    n: Option<u32>,
    eps: Option<&ExactValue>,
) -> Vec<(u32, bool)> {
    m_values
        .into_iter()
        .filter_map(|m| audit_claim(claim, m, n, eps, 0, 0).ok().map(|r| (m, r.holds)))
        .collect()
}

/// One grid point of the Chernoff-dominance check: the exact tail at
/// `(1 ± eps) p m` against the printed bound `e^{-p m eps^2}`. Set
/// `standard_constants` to use the textbook exponent divisors (3 upper,
/// 2 lower) instead.
pub fn verify_chernoff(
    p: &ExactValue,
    m: u32,
    eps: &ExactValue,
    direction: TailDirection,
    standard_constants: bool,
    digits: u32,
) -> Result<(ExactValue, Interval, bool), ProbError> {
    let mean = p * &ExactValue::from_int(m as i64);
    let tail = match direction {
        TailDirection::Above => {
            let threshold = &mean * &(ExactValue::one() + eps);
            exact_binomial_tail(m, p, &threshold, TailDirection::Above)?
        }
        TailDirection::Below => {
            let threshold = &mean * &(ExactValue::one() - eps);
            exact_binomial_tail(m, p, &threshold, TailDirection::Below)?
        }
    };
    let make = |d: u32| {
        if standard_constants {
            super::chernoff_bound_standard(p, m, eps, direction, d)
        } else {
            chernoff_bound(p, m, eps, direction, d)
        }
    };
    let (ok, bound) = decide_at_most(&tail, make(digits)?, make)?;
    Ok((tail, bound, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::binomial_pmf;

    #[test]
    fn claim_44_fails_at_m16() {
        let eps = ExactValue::ratio(1, 4);
        let report = audit_claim(ClaimId::Claim44, 16, None, Some(&eps), 0, 0).unwrap();
        assert_eq!(report.exact, ExactValue::ratio(67, 256));
        assert!(!report.holds, "bound must fail at m = 16");
        // Bound value is e^{-4} ~ 0.0183; the claim needs >= 1 - 0.0183.
        assert!(report.bound.contains(&ExactValue::ratio(183, 10_000)) || report.bound.certainly_at_most(&ExactValue::ratio(19, 1000)));
        assert!(report.hypothesis_note.is_none(), "m^eps = 2 is exactly the hypothesis edge");
    }

    #[test]
    fn claim_44_flags_hypothesis_breach_when_deviation_is_large() {
        let eps = ExactValue::ratio(1, 2);
        let report = audit_claim(ClaimId::Claim44, 16, None, Some(&eps), 0, 0).unwrap();
        // m^eps = 4 > 2x the unit mean.
        assert!(report.hypothesis_note.is_some());
    }

    #[test]
    fn claim_37_at_m300() {
        let report = audit_claim(ClaimId::Claim37, 300, Some(3), None, 0, 0).unwrap();
        // Bound is e^{-300/300} = e^{-1} = 0.3678794...
        assert!(report.bound.certainly_at_least(&ExactValue::ratio(367_879, 1_000_000)));
        assert!(report.bound.certainly_at_most(&ExactValue::ratio(367_880, 1_000_000)));
        // The event threshold sits below the mean, so the probability is
        // large and the printed bound fails at this scale.
        assert!(!report.holds);
        assert!(report.exact > ExactValue::ratio(1, 3));
    }

    #[test]
    fn claim_37_is_vacuously_true_at_tiny_m() {
        // e^{-m/300} is close to 1 while the event probability is bounded
        // away from it, so the bound holds trivially for small m.
        let report = audit_claim(ClaimId::Claim37, 4, Some(2), None, 0, 0).unwrap();
        assert!(report.holds);
        // Hand oracle: Bin(4, 3/4), Pr[X > 4 - 1.01] = Pr[X >= 3] = 189/256.
        assert_eq!(report.exact, ExactValue::ratio(189, 256));
    }

    #[test]
    fn o_event_holds_at_m16() {
        let report = audit_claim(ClaimId::OEvent4, 16, None, None, 0, 0).unwrap();
        // Needs two demanded items overall; exact = Pr[Bin(16, 1/4) >= 2].
        let pmf = binomial_pmf(16, &ExactValue::ratio(1, 4)).unwrap();
        let expect = ExactValue::one() - &pmf[0] - &pmf[1];
        assert_eq!(report.exact, expect);
        assert!(report.holds);
    }

    #[test]
    fn claim_38_reports_and_mc_agrees() {
        let report = audit_claim(ClaimId::Claim38, 16, Some(2), None, 20_000, 7).unwrap();
        let mc = report.mc.as_ref().unwrap();
        let exact = report.exact.to_f64();
        let sigma = (exact * (1.0 - exact) / mc.trials as f64).sqrt();
        assert!(
            (mc.rate() - exact).abs() <= 3.0 * sigma + 1e-9,
            "mc {} vs exact {exact}",
            mc.rate()
        );
    }

    #[test]
    fn mc_cross_checks_claim_44() {
        let eps = ExactValue::ratio(1, 4);
        let report = audit_claim(ClaimId::Claim44, 16, None, Some(&eps), 50_000, 42).unwrap();
        let mc = report.mc.unwrap();
        let exact = 67.0 / 256.0;
        let sigma = (exact * (1.0 - exact) / mc.trials as f64).sqrt();
        assert!((mc.rate() - exact).abs() <= 3.0 * sigma, "mc rate {}", mc.rate());
    }

    #[test]
    fn scan_documents_claim_37_crossover() {
        let scan = scan_bound_holds(ClaimId::Claim37, (50..=500).step_by(50), Some(3), None);
        assert_eq!(scan.len(), 10);
        // Holds while the bound is vacuous, fails once e^{-m/300} decays.
        assert!(scan.first().unwrap().1);
        assert!(!scan.last().unwrap().1);
    }

    #[test]
    fn verify_chernoff_both_directions() {
        let p = ExactValue::ratio(3, 10);
        let eps = ExactValue::ratio(1, 2);
        for dir in [TailDirection::Above, TailDirection::Below] {
            let (tail, bound, ok) = verify_chernoff(&p, 60, &eps, dir, false, 40).unwrap();
            assert!(ok, "direction {dir:?}: tail {tail} vs bound {}", bound.to_decimal_string(8));
            let (_, _, ok_std) = verify_chernoff(&p, 60, &eps, dir, true, 40).unwrap();
            assert!(ok_std);
        }
    }

    #[test]
    fn claim_parsing() {
        assert_eq!(ClaimId::parse("3.7").unwrap(), ClaimId::Claim37);
        assert_eq!(ClaimId::parse("O-4").unwrap(), ClaimId::OEvent4);
        assert!(ClaimId::parse("9.9").is_err());
        assert_eq!(ClaimId::Claim44.to_string(), "4.4");
    }
}
