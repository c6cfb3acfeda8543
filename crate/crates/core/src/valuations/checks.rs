//! Exhaustive monotonicity and submodularity checkers.
//!
//! Submodularity is checked through BOTH equivalent definitions — the
//! marginal form over all `(S ⊆ T, j ∉ T)` and the lattice form over all
//! pairs — and the two verdicts are required to agree. A disagreement can
//! only mean a bug in one of the checkers, and is reported as an
//! internal-consistency error rather than a witness.

use crate::bundle::{ensure_enumerable, Bundle, BundleError};
use crate::exact::ExactValue;
use crate::oracle::Valuation;

use super::ZooError;

/// Values of `v` on all `2^m` bundles, indexed by bit pattern.
pub fn value_table(v: &dyn Valuation) -> Result<Vec<ExactValue>, BundleError> {
    let m = v.universe_size();
    ensure_enumerable(m)?;
    Ok((0u64..1 << m).map(|pattern| v.value(&Bundle::from_pattern(m, pattern))).collect())
}

/// A violation of `v(S ∪ {j}) >= v(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityWitness {
    pub base: Bundle,
    pub item: u32,
    pub base_value: ExactValue,
    pub extended_value: ExactValue,
}

/// Returns `None` if `v` is non-decreasing, otherwise the first witness in
/// bit-pattern order.
pub fn check_monotone(v: &dyn Valuation) -> Result<Option<MonotonicityWitness>, BundleError> {
    let m = v.universe_size();
    let table = value_table(v)?;
    for pattern in 0u64..1 << m {
        for j in 0..m {
            if pattern >> j & 1 == 1 {
                continue;
            }
            let extended = pattern | 1 << j;
            if table[extended as usize] < table[pattern as usize] {
                return Ok(Some(MonotonicityWitness {
                    base: Bundle::from_pattern(m, pattern),
                    item: j,
                    base_value: table[pattern as usize].clone(),
                    extended_value: table[extended as usize].clone(),
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubmodularityWitness {
    /// `v(S ∪ {j}) - v(S) < v(T ∪ {j}) - v(T)` with `S ⊆ T`, `j ∉ T`.
    Marginal { small: Bundle, large: Bundle, item: u32 },
    /// `v(S) + v(T) < v(S ∪ T) + v(S ∩ T)`.
    Lattice { s: Bundle, t: Bundle },
}

fn marginal_violation(m: u32, table: &[ExactValue]) -> Option<SubmodularityWitness> {
    for large in 0u64..1 << m {
        // Submasks of `large` via the carry-rippler walk.
        let mut small = large;
        loop {
            for j in 0..m {
                if large >> j & 1 == 1 {
                    continue;
                }
                let bit = 1u64 << j;
                let gain_small = &table[(small | bit) as usize] - &table[small as usize];
                let gain_large = &table[(large | bit) as usize] - &table[large as usize];
                if gain_small < gain_large {
                    return Some(SubmodularityWitness::Marginal {
                        small: Bundle::from_pattern(m, small),
                        large: Bundle::from_pattern(m, large),
                        item: j,
                    });
                }
            }
            if small == 0 {
                break;
            }
            small = (small - 1) & large;
        }
    }
    None
}

fn lattice_violation(m: u32, table: &[ExactValue]) -> Option<SubmodularityWitness> {
    for s in 0u64..1 << m {
        for t in s..1 << m {
            let lhs = &table[s as usize] + &table[t as usize];
            let rhs = &table[(s | t) as usize] + &table[(s & t) as usize];
            if lhs < rhs {
                return Some(SubmodularityWitness::Lattice {
                    s: Bundle::from_pattern(m, s),
                    t: Bundle::from_pattern(m, t),
                });
            }
        }
    }
    None
}

/// Returns `None` if `v` is submodular under both definitions, a witness if it
/// is not, and [`ZooError::DefinitionMismatch`] if the two checkers disagree.
pub fn check_submodular(v: &dyn Valuation) -> Result<Option<SubmodularityWitness>, ZooError> {
    let m = v.universe_size();
    let table = value_table(v)?;
    let marginal = marginal_violation(m, &table);
    let lattice = lattice_violation(m, &table);
    match (marginal, lattice) {
        (None, None) => Ok(None),
        (Some(w), Some(_)) => Ok(Some(w)),
        (m_verdict, l_verdict) => Err(ZooError::DefinitionMismatch(format!(
            "marginal={m_verdict:?} lattice={l_verdict:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnValuation;
    use crate::valuations::{AdditiveValuation, PolarAdditiveValuation};

    #[test]
    fn additive_is_monotone_and_submodular() {
        let v = AdditiveValuation::from_ints(&[3, 0, 7, 1, 2]).unwrap();
        assert_eq!(check_monotone(&v).unwrap(), None);
        assert_eq!(check_submodular(&v).unwrap(), None);
    }

    #[test]
    fn polar_is_monotone_and_submodular() {
        let v = PolarAdditiveValuation::new(Bundle::from_items(5, &[1, 3]).unwrap()).unwrap();
        assert_eq!(check_monotone(&v).unwrap(), None);
        assert_eq!(check_submodular(&v).unwrap(), None);
    }

    #[test]
    fn hand_built_violations_are_witnessed() {
        // v({0}) = 1 but v({0,1}) = 0: not monotone.
        let v = FnValuation {
            m: 2,
            f: |b: &Bundle| {
                if b.len() == 1 && b.contains(0) {
                    ExactValue::one()
                } else {
                    ExactValue::zero()
                }
            },
        };
        let w = check_monotone(&v).unwrap().unwrap();
        assert_eq!(w.base, Bundle::from_items(2, &[0]).unwrap());
        assert_eq!(w.item, 1);

        // Pure coverage bonus only at the full set: supermodular.
        let v = FnValuation {
            m: 3,
            f: |b: &Bundle| if b.len() == 3 { ExactValue::from_int(10) } else { ExactValue::zero() },
        };
        assert!(check_submodular(&v).unwrap().is_some());
    }

    #[test]
    fn budget_capped_cardinality_is_submodular() {
        let v = FnValuation {
            m: 6,
            f: |b: &Bundle| ExactValue::from_int(b.len().min(3) as i64),
        };
        assert_eq!(check_submodular(&v).unwrap(), None);
        assert_eq!(check_monotone(&v).unwrap(), None);
    }

    #[test]
    fn cap_is_enforced() {
        let v = FnValuation { m: 30, f: |_: &Bundle| ExactValue::zero() };
        assert!(matches!(check_monotone(&v), Err(BundleError::EnumerationRefused { .. })));
    }
}
