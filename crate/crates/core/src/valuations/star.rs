//! The star construction: a submodular valuation that hides one distinguished
//! bundle inside a structured submenu.
//!
//! Over a submenu of size-`k` bundles with a distinguished `star`, the value
//! of a bundle `S` is determined by the first matching case:
//!
//! 1. `|S| < k`            -> `|S| * t`
//! 2. `S` a non-star member -> `k*t - 1/m^4`
//! 3. `S` the star, or `S` strictly contains a member -> `k*t`
//! 4. otherwise            -> `t * (k - 1/2^|S|)`
//!
//! Case 4 halves the remaining marginal with each added item, so the
//! valuation is non-decreasing and submodular, its maximum is exactly `k*t`,
//! and case-4 values stay below `t * (k - 1/2^m)` except at `S = M`.
//! Two star valuations over the same submenu differ exactly on the two
//! distinguished bundles, which is what makes identification expensive.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::bundle::Bundle;
use crate::exact::ExactValue;
use crate::oracle::Valuation;

use super::ZooError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarValuation {
    m: u32,
    k: u32,
    submenu: BTreeSet<Bundle>,
    star: Bundle,
    t: ExactValue,
    // cached case constants
    top: ExactValue,
    near_top: ExactValue,
}

/// `m * 2^m`, the threshold `t` must strictly exceed.
pub(crate) fn t_lower_bound(m: u32) -> BigInt {
    BigInt::from(m) << m
}

impl StarValuation {
    pub fn new(
        m: u32,
        k: u32,
        submenu: Vec<Bundle>,
        star: Bundle,
        t: ExactValue,
    ) -> Result<Self, ZooError> {
        let bound = t_lower_bound(m);
        if t <= ExactValue::from_bigint(bound.clone()) {
            return Err(ZooError::TooSmallT { t, bound });
        }
        Self::new_unchecked(m, k, submenu, star, t)
    }

    /// Skips the `t > m * 2^m` bound (structure is still validated); exists so
    /// negative tests can build deliberately malformed instances.
    pub fn new_unchecked(
        m: u32,
        k: u32,
        submenu: Vec<Bundle>,
        star: Bundle,
        t: ExactValue,
    ) -> Result<Self, ZooError> {
        if m == 0 {
            return Err(ZooError::EmptyUniverse);
        }
        if k == 0 || k > m {
            return Err(ZooError::BadCommonSize { k, m });
        }
        if submenu.is_empty() {
            return Err(ZooError::EmptySubmenu);
        }
        for member in &submenu {
            if member.len() != k {
                return Err(ZooError::SubmenuSizeMismatch(member.clone(), member.len(), k));
            }
        }
        let submenu: BTreeSet<Bundle> = submenu.into_iter().collect();
        if !submenu.contains(&star) {
            return Err(ZooError::StarNotInSubmenu);
        }
        let top = &t * &ExactValue::from_int(k as i64);
        let near_top = &top - &ExactValue::inv_int_pow(m as u64, 4);
        Ok(StarValuation { m, k, submenu, star, t, top, near_top })
    }

    /// Smallest integer `t` satisfying the bound: `m * 2^m + 1`.
    pub fn default_t(m: u32) -> ExactValue {
        ExactValue::from_bigint(t_lower_bound(m) + 1)
    }

    pub fn with_default_t(
        m: u32,
        k: u32,
        submenu: Vec<Bundle>,
        star: Bundle,
    ) -> Result<Self, ZooError> {
        Self::new(m, k, submenu, star, Self::default_t(m))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> &ExactValue {
        &self.t
    }

    pub fn star(&self) -> &Bundle {
        &self.star
    }

    pub fn submenu(&self) -> impl Iterator<Item = &Bundle> {
        self.submenu.iter()
    }

    pub fn submenu_len(&self) -> usize {
        self.submenu.len()
    }

    /// Maximum attainable value, `k * t`.
    pub fn top_value(&self) -> &ExactValue {
        &self.top
    }

    /// The value every bundle outside the submenu would get regardless of
    /// which member is the star; `None` when the query is a submenu member
    /// (whose answer does depend on the star).
    pub fn star_independent_value(&self, bundle: &Bundle) -> Option<ExactValue> {
        if self.submenu.contains(bundle) {
            None
        } else {
            Some(self.value_with_star(bundle, None))
        }
    }

    fn value_with_star(&self, bundle: &Bundle, star: Option<&Bundle>) -> ExactValue {
        let size = bundle.len();
        if size < self.k {
            return &self.t * &ExactValue::from_int(size as i64);
        }
        if self.submenu.contains(bundle) {
            return if star == Some(bundle) { self.top.clone() } else { self.near_top.clone() };
        }
        if size > self.k && self.submenu.iter().any(|member| bundle.is_strict_superset_of(member))
        {
            return self.top.clone();
        }
        // t * (k - 1/2^size)
        let gap = ExactValue::ratio_big(BigInt::from(1), BigInt::from(1) << size);
        &self.t * &(ExactValue::from_int(self.k as i64) - gap)
    }
}

impl Valuation for StarValuation {
    fn universe_size(&self) -> u32 {
        self.m
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        self.value_with_star(bundle, Some(&self.star))
    }
}
