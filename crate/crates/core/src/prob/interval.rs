//! Rigorous enclosures for the irrational quantities the bounds need.
//!
//! `e^{-x}` and `m^{a/b}` are irrational in general, so they are computed as
//! rational intervals guaranteed to contain the true value, refined until the
//! requested relative precision holds. Comparisons against exact rationals go
//! through interval containment: a claim only counts as settled when the
//! whole interval sits on one side.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::exact::ExactValue;

use super::ProbError;

/// Default relative precision, in decimal digits, for interval enclosures.
pub const DEFAULT_PRECISION_DIGITS: u32 = 50;

/// A closed rational interval `[lo, hi]` containing one real value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    lo: ExactValue,
    hi: ExactValue,
}

impl Interval {
    pub fn new(lo: ExactValue, hi: ExactValue) -> Self {
        assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(v: ExactValue) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn lo(&self) -> &ExactValue {
        &self.lo
    }

    pub fn hi(&self) -> &ExactValue {
        &self.hi
    }

    pub fn width(&self) -> ExactValue {
        &self.hi - &self.lo
    }

    /// The enclosed value is certainly `<= v`.
    pub fn certainly_at_most(&self, v: &ExactValue) -> bool {
        self.hi <= *v
    }

    /// The enclosed value is certainly `>= v`.
    pub fn certainly_at_least(&self, v: &ExactValue) -> bool {
        self.lo >= *v
    }

    pub fn contains(&self, v: &ExactValue) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Decimal rendering of the upper endpoint; what reports print.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        self.hi.to_decimal_string(digits)
    }
}

/// Encloses `e^{-x}` for rational `x >= 0` to the requested relative
/// precision.
///
/// Evaluates the positive series `e^x = sum x^k / k!` exactly by a Horner
/// recurrence on one unreduced big fraction (no per-term gcd), then bounds
/// the tail geometrically: for `r = x/(N+2) < 1` the remainder is at most
/// `term_{N+1} / (1 - r)`. That brackets `e^x` in `[S, S + tail]` and the
/// reciprocals enclose `e^{-x}`.
pub fn exp_neg(x: &ExactValue, digits: u32) -> Result<Interval, ProbError> {
    if x.is_negative() {
        return Err(ProbError::NegativeExponent(x.clone()));
    }
    if x.is_zero() {
        return Ok(Interval::point(ExactValue::one()));
    }
    let a = x.numer().clone();
    let b = x.denom().clone();
    let xf = x.to_f64();
    let ln10 = std::f64::consts::LN_10;
    // Pick N in floating point (the exact check below is what guarantees
    // soundness): first index past the hump where term_N/e^x drops below
    // the target, with margin.
    let target = -(digits as f64 + 3.0) * ln10 - xf;
    let mut n: u64 = 1;
    let mut log_term = 0.0f64;
    loop {
        log_term += xf.ln() - (n as f64).ln();
        if (n as f64) > xf && log_term < target {
            break;
        }
        n += 1;
        if n > 5_000_000 {
            return Err(ProbError::PrecisionExhausted);
        }
    }
    let pow10 = BigInt::from(10u32).pow(digits);
    for _ in 0..8 {
        // Horner: S = 1 + x/1 (1 + x/2 (1 + ... (1 + x/N))) over the common
        // denominator b^N * N!, never reduced.
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for k in (1..=n).rev() {
            let step = &b * BigInt::from(k);
            num = &num * &a + &den * &step;
            den *= step;
        }
        // term_{N+1} = x^{N+1}/(N+1)! relative to the same S = num/den:
        // term/S = a^{N+1} / (den_next * num) with den_next = b^{N+1}(N+1)!
        // as a multiplier against den; keep it as an explicit fraction.
        let t_num = a.clone().pow((n + 1) as u32);
        let t_den = &den * &b * BigInt::from(n + 1);
        // Geometric ratio r = x / (n + 2) must be < 1.
        let r_num = &a;
        let r_den = &b * BigInt::from(n + 2);
        if *r_num >= r_den {
            n = n * 2 + 2;
            continue;
        }
        // tail = t * r_den / (r_den - r_num); require tail * 10^d <= S, i.e.
        // t_num * r_den * 10^d * den <= num * t_den * (r_den - r_num).
        let lhs = &t_num * &r_den * &pow10 * &den;
        let rhs = &num * &t_den * (&r_den - r_num);
        if lhs > rhs {
            n += n / 4 + 2;
            continue;
        }
        // e^x in [num/den, num/den + tail]; reciprocate.
        let s = ExactValue::ratio_big(num, den);
        let tail = ExactValue::ratio_big(&t_num * &r_den, &t_den * (&r_den - r_num));
        let hi_ex = &s + &tail;
        return Ok(Interval::new(hi_ex.recip(), s.recip()));
    }
    Err(ProbError::PrecisionExhausted)
}

/// Encloses `e^{-x}` where `x` itself is only known as an interval.
pub fn exp_neg_over(x: &Interval, digits: u32) -> Result<Interval, ProbError> {
    let lo = exp_neg(x.hi(), digits)?;
    let hi = exp_neg(x.lo(), digits)?;
    Ok(Interval::new(lo.lo().clone(), hi.hi().clone()))
}

/// Encloses `base^exp` for a non-negative rational exponent, exact when the
/// root is an integer power.
pub fn rational_power(base: u64, exp: &ExactValue, digits: u32) -> Result<Interval, ProbError> {
    use num_traits::ToPrimitive;
    if exp.is_negative() {
        return Err(ProbError::NegativeExponent(exp.clone()));
    }
    let a = exp.numer().to_u32().ok_or_else(|| ProbError::BadParameter("exponent too large".into()))?;
    let b = exp.denom().to_u32().ok_or_else(|| ProbError::BadParameter("exponent denominator too large".into()))?;
    let power = BigInt::from(base).pow(a);
    let scale = BigInt::from(10u32).pow(digits);
    let scaled_power = &power * scale.clone().pow(b);
    let scaled = scaled_power.nth_root(b);
    let lo = ExactValue::ratio_big(scaled.clone(), scale.clone());
    // Exact when the root has no remainder.
    if scaled.pow(b) == scaled_power {
        return Ok(Interval::point(lo));
    }
    let hi = &lo + &ExactValue::ratio_big(BigInt::one(), scale);
    Ok(Interval::new(lo, hi))
}
