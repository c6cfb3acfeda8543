//! The target/flat valuation pair used by the exact public-project argument.
//!
//! Both are defined over a perfect-square universe with `t = m^10`. They agree
//! on every bundle whose size differs from `sqrt(m)`; on size-`sqrt(m)`
//! bundles the target valuation jumps to `t * sqrt(m)` exactly when the
//! intersection with the hidden target exceeds `floor(m^eps)`, while the flat
//! valuation always stays at `t * (sqrt(m) - 1/2)`. Distinguishing the two is
//! therefore a needle-in-a-haystack search over size-`sqrt(m)` queries.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::bundle::Bundle;
use crate::exact::ExactValue;
use crate::oracle::Valuation;

use super::ZooError;

/// `floor(base^eps)` for a non-negative rational exponent; see
/// [`crate::exact::floor_rational_power`].
pub fn floor_rational_power(base: u64, eps: &ExactValue) -> Result<BigInt, ZooError> {
    crate::exact::floor_rational_power(base, eps).ok_or_else(|| ZooError::BadExponent(eps.clone()))
}

/// `ceil(base^eps)` for a non-negative rational exponent.
pub fn ceil_rational_power(base: u64, eps: &ExactValue) -> Result<BigInt, ZooError> {
    crate::exact::ceil_rational_power(base, eps).ok_or_else(|| ZooError::BadExponent(eps.clone()))
}

/// Exact integer square root check; public-project constructions reject
/// non-squares rather than rounding.
pub(crate) fn exact_sqrt(m: u32) -> Result<u32, ZooError> {
    if m == 0 {
        return Err(ZooError::EmptyUniverse);
    }
    let r = m.isqrt();
    if r * r == m {
        Ok(r)
    } else {
        Err(ZooError::NotPerfectSquare(m))
    }
}

fn base_value(m: u32, root: u32, t: &ExactValue, size: u32) -> ExactValue {
    debug_assert_eq!(root * root, m);
    if size < root {
        t * &ExactValue::from_int(size as i64)
    } else if size > root {
        t * &ExactValue::from_int(root as i64)
    } else {
        t * &(ExactValue::from_int(root as i64) - ExactValue::ratio(1, 2))
    }
}

/// `v_T`: additive up to size `sqrt(m)`, with a bonus exactly on
/// size-`sqrt(m)` bundles that intersect the target in more than
/// `floor(m^eps)` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetValuation {
    m: u32,
    root: u32,
    target: Bundle,
    epsilon: ExactValue,
    threshold: u32,
    t: ExactValue,
}

impl TargetValuation {
    pub fn new(m: u32, target: Bundle, epsilon: ExactValue) -> Result<Self, ZooError> {
        let root = exact_sqrt(m)?;
        if target.universe_size() != m || target.len() != root {
            return Err(ZooError::BadTargetSize { got: target.len(), want: root });
        }
        let threshold = floor_rational_power(m as u64, &epsilon)?
            .to_u32()
            .ok_or_else(|| ZooError::BadExponent(epsilon.clone()))?;
        Ok(TargetValuation { m, root, target, epsilon, threshold, t: ExactValue::int_pow(m as u64, 10) })
    }

    pub fn target(&self) -> &Bundle {
        &self.target
    }

    pub fn epsilon(&self) -> &ExactValue {
        &self.epsilon
    }

    /// `floor(m^eps)`: a size-`sqrt(m)` bundle gets the bonus iff its
    /// intersection with the target strictly exceeds this count.
    pub fn intersection_threshold(&self) -> u32 {
        self.threshold
    }

    pub fn t(&self) -> &ExactValue {
        &self.t
    }

    /// The bonus value `t * sqrt(m)`.
    pub fn high_value(&self) -> ExactValue {
        &self.t * &ExactValue::from_int(self.root as i64)
    }
}

impl Valuation for TargetValuation {
    fn universe_size(&self) -> u32 {
        self.m
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        let size = bundle.len();
        if size == self.root && bundle.intersection_len(&self.target) > self.threshold {
            return self.high_value();
        }
        base_value(self.m, self.root, &self.t, size)
    }
}

/// `v_∅`: identical to every target valuation except that no size-`sqrt(m)`
/// bundle ever gets the bonus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatValuation {
    m: u32,
    root: u32,
    t: ExactValue,
}

impl FlatValuation {
    pub fn new(m: u32) -> Result<Self, ZooError> {
        let root = exact_sqrt(m)?;
        Ok(FlatValuation { m, root, t: ExactValue::int_pow(m as u64, 10) })
    }

    pub fn t(&self) -> &ExactValue {
        &self.t
    }
}

impl Valuation for FlatValuation {
    fn universe_size(&self) -> u32 {
        self.m
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        base_value(self.m, self.root, &self.t, bundle.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::bundle_iter;

    #[test]
    fn rational_power_floors() {
        let quarter = ExactValue::ratio(1, 4);
        assert_eq!(floor_rational_power(16, &quarter).unwrap(), BigInt::from(2));
        assert_eq!(floor_rational_power(17, &quarter).unwrap(), BigInt::from(2));
        assert_eq!(floor_rational_power(81, &quarter).unwrap(), BigInt::from(3));
        assert_eq!(ceil_rational_power(16, &quarter).unwrap(), BigInt::from(2));
        assert_eq!(ceil_rational_power(17, &quarter).unwrap(), BigInt::from(3));
        assert_eq!(floor_rational_power(9, &ExactValue::ratio(1, 2)).unwrap(), BigInt::from(3));
        assert!(floor_rational_power(9, &ExactValue::ratio(-1, 2)).is_err());
    }

    #[test]
    fn hand_evaluated_cases_m16() {
        let t = ExactValue::int_pow(16, 10);
        let target = Bundle::from_items(16, &[0, 1, 2, 3]).unwrap();
        let v = TargetValuation::new(16, target, ExactValue::ratio(1, 4)).unwrap();
        assert_eq!(v.intersection_threshold(), 2);

        // |S| = 4, |S ∩ T| = 2: no bonus, value t * 7/2.
        let s = Bundle::from_items(16, &[0, 1, 4, 5]).unwrap();
        assert_eq!(v.value(&s), &t * &ExactValue::ratio(7, 2));

        // |S| = 4, |S ∩ T| = 3: bonus, value 4t.
        let s = Bundle::from_items(16, &[0, 1, 2, 5]).unwrap();
        assert_eq!(v.value(&s), &t * &ExactValue::from_int(4));

        assert_eq!(v.value(&Bundle::empty(16)), ExactValue::zero());
        // Sizes off sqrt(m) are linear then capped.
        let s3 = Bundle::from_items(16, &[0, 1, 2]).unwrap();
        assert_eq!(v.value(&s3), &t * &ExactValue::from_int(3));
        let s5 = Bundle::from_items(16, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(v.value(&s5), &t * &ExactValue::from_int(4));
    }

    #[test]
    fn target_and_flat_agree_off_the_square_root_slice() {
        let m = 9;
        let flat = FlatValuation::new(m).unwrap();
        let target_set = Bundle::from_items(m, &[0, 4, 8]).unwrap();
        let v = TargetValuation::new(m, target_set, ExactValue::ratio(1, 4)).unwrap();
        for b in bundle_iter(m, None).unwrap() {
            if b.len() != 3 {
                assert_eq!(v.value(&b), flat.value(&b), "{b:?}");
            }
        }
        // And they differ somewhere on the slice (at the target itself).
        assert_ne!(v.value(v.target()), flat.value(v.target()));
    }

    #[test]
    fn constructor_rejections() {
        assert!(matches!(FlatValuation::new(8), Err(ZooError::NotPerfectSquare(8))));
        let small = Bundle::from_items(16, &[0]).unwrap();
        assert!(matches!(
            TargetValuation::new(16, small, ExactValue::ratio(1, 4)),
            Err(ZooError::BadTargetSize { got: 1, want: 4 })
        ));
    }

    #[test]
    fn all_m4_targets_are_monotone_and_submodular() {
        use crate::valuations::{check_monotone, check_submodular};
        // m = 4, eps = 1/4 makes the threshold floor(4^{1/4}) = 1.
        let eps = ExactValue::ratio(1, 4);
        let flat = FlatValuation::new(4).unwrap();
        assert!(check_monotone(&flat).unwrap().is_none());
        assert!(check_submodular(&flat).unwrap().is_none());
        for target in bundle_iter(4, Some(2)).unwrap() {
            let v = TargetValuation::new(4, target, eps.clone()).unwrap();
            assert_eq!(v.intersection_threshold(), 1);
            assert!(check_monotone(&v).unwrap().is_none());
            assert!(check_submodular(&v).unwrap().is_none(), "{:?}", v.target());
        }
    }
}
