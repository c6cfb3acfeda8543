//! Arbitrary-precision rational values.
//!
//! Every price, valuation, and profit in this crate is an [`ExactValue`] so that
//! strict inequalities between quantities like `1/m^3 - 1/m^5` are decidable.
//! Floating point never appears on a correctness-relevant path.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number in canonical reduced form.
///
/// Thin wrapper around [`BigRational`]; all arithmetic is exact and the
/// serialized form is the string `"num/den"` (or just `"num"` for integers).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactValue(BigRational);

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactValue(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactValue(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        ExactValue(BigRational::from_integer(n))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactValue(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn ratio_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        ExactValue(BigRational::new(num, den))
    }

    /// `base^exp` for a non-negative integer base and exponent.
    pub fn int_pow(base: u64, exp: u32) -> Self {
        ExactValue::from_bigint(BigInt::from(base).pow(exp))
    }

    /// `1 / base^exp`.
    pub fn inv_int_pow(base: u64, exp: u32) -> Self {
        assert!(base != 0, "zero base");
        ExactValue(BigRational::new(BigInt::one(), BigInt::from(base).pow(exp)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        ExactValue(self.0.abs())
    }

    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        ExactValue(self.0.recip())
    }

    /// Integer power with negative exponents allowed (value must be nonzero).
    pub fn pow(&self, exp: i32) -> Self {
        ExactValue(self.0.pow(exp))
    }

    /// Lossy conversion for display and statistical tolerances only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Canonical string form: `"num/den"`, or `"num"` when the value is an integer.
    pub fn to_ratio_string(&self) -> String {
        if self.0.is_integer() {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }

    /// Parses `"num"` or `"num/den"`.
    pub fn parse_ratio(s: &str) -> Result<Self, ParseExactError> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| ParseExactError(s.to_string()))?;
        let den = BigInt::from_str(den).map_err(|_| ParseExactError(s.to_string()))?;
        if den.is_zero() {
            return Err(ParseExactError(s.to_string()));
        }
        Ok(ExactValue(BigRational::new(num, den)))
    }

    /// Fixed-point decimal rendering, truncated toward zero at `digits` places.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let sign = if self.0.is_negative() { "-" } else { "" };
        let v = self.0.abs();
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (&v * BigRational::from_integer(scale.clone())).floor().to_integer();
        let int_part = &scaled / &scale;
        let frac_part = &scaled % &scale;
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac:0>width$}", frac = frac_part, width = digits as usize)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseExactError(pub String);

impl fmt::Display for ParseExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a rational literal: {:?}", self.0)
    }
}

impl std::error::Error for ParseExactError {}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ratio_string())
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ratio_string())
    }
}

impl From<i64> for ExactValue {
    fn from(n: i64) -> Self {
        ExactValue::from_int(n)
    }
}

impl From<u32> for ExactValue {
    fn from(n: u32) -> Self {
        ExactValue::from_int(n as i64)
    }
}

impl From<BigInt> for ExactValue {
    fn from(n: BigInt) -> Self {
        ExactValue::from_bigint(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: ExactValue) -> ExactValue {
                ExactValue(self.0.$method(rhs.0))
            }
        }
        impl $trait<&ExactValue> for &ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: &ExactValue) -> ExactValue {
                ExactValue((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&ExactValue> for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: &ExactValue) -> ExactValue {
                ExactValue(self.0.$method(&rhs.0))
            }
        }
        impl $trait<ExactValue> for &ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: ExactValue) -> ExactValue {
                ExactValue((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue(-self.0)
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue(-&self.0)
    }
}

impl Sum for ExactValue {
    fn sum<I: Iterator<Item = ExactValue>>(iter: I) -> ExactValue {
        iter.fold(ExactValue::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a ExactValue> for ExactValue {
    fn sum<I: Iterator<Item = &'a ExactValue>>(iter: I) -> ExactValue {
        iter.fold(ExactValue::zero(), |acc, v| acc + v)
    }
}

impl PartialEq<i64> for ExactValue {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for ExactValue {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_ratio_string())
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExactValue::parse_ratio(&s).map_err(de::Error::custom)
    }
}

/// `floor(base^exp)` for a non-negative rational exponent `a/b`, computed
/// exactly as the integer `b`-th root of `base^a`. `None` when the exponent
/// is negative or too large to evaluate.
pub fn floor_rational_power(base: u64, exp: &ExactValue) -> Option<BigInt> {
    if exp.is_negative() {
        return None;
    }
    let num = exp.numer().to_u32()?;
    let den = exp.denom().to_u32()?;
    Some(BigInt::from(base).pow(num).nth_root(den))
}

/// `ceil(base^exp)` for a non-negative rational exponent.
pub fn ceil_rational_power(base: u64, exp: &ExactValue) -> Option<BigInt> {
    if exp.is_negative() {
        return None;
    }
    let num = exp.numer().to_u32()?;
    let den = exp.denom().to_u32()?;
    let power = BigInt::from(base).pow(num);
    let root = power.nth_root(den);
    if root.clone().pow(den) < power {
        Some(root + 1)
    } else {
        Some(root)
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Binomial coefficient `C(n, k)` via the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
