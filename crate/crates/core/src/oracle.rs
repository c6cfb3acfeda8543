//! Value-query oracles and query accounting.
//!
//! A valuation is a black box answering value queries only: given a bundle,
//! return its value. Demand queries are deliberately absent from the
//! interface. [`QueryCounter`] wraps any oracle to count and log queries
//! without changing any answer.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::bundle::Bundle;
use crate::exact::ExactValue;

/// A normalized (`v(∅) = 0`), deterministic set-function oracle.
///
/// Implementations must be pure: repeated queries on the same bundle return
/// the same value, and shared references may be queried from many threads.
pub trait Valuation: Sync {
    fn universe_size(&self) -> u32;

    fn value(&self, bundle: &Bundle) -> ExactValue;
}

impl<V: Valuation + ?Sized> Valuation for &V {
    fn universe_size(&self) -> u32 {
        (**self).universe_size()
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        (**self).value(bundle)
    }
}

impl Valuation for Box<dyn Valuation> {
    fn universe_size(&self) -> u32 {
        (**self).universe_size()
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        (**self).value(bundle)
    }
}

/// A valuation defined by an explicit closure; handy for hand-built
/// counterexamples in tests.
pub struct FnValuation<F: Fn(&Bundle) -> ExactValue + Sync> {
    pub m: u32,
    pub f: F,
}

impl<F: Fn(&Bundle) -> ExactValue + Sync> Valuation for FnValuation<F> {
    fn universe_size(&self) -> u32 {
        self.m
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        (self.f)(bundle)
    }
}

/// Counting wrapper: transparent on answers, increments on every call.
///
/// Duplicate queries are counted; deduplication is the caller's concern.
/// The count is atomic so parallel experiments stay correct; under
/// parallelism the log order is unspecified.
pub struct QueryCounter<V: Valuation> {
    inner: V,
    count: AtomicU64,
    log: Mutex<Vec<Bundle>>,
}

impl<V: Valuation> QueryCounter<V> {
    pub fn new(inner: V) -> Self {
        QueryCounter { inner, count: AtomicU64::new(0), log: Mutex::new(Vec::new()) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::SeqCst)
    }

    pub fn log(&self) -> Vec<Bundle> {
        self.log.lock().unwrap().clone()
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::SeqCst);
        self.log.lock().unwrap().clear();
    }

    pub fn into_inner(self) -> V {
        self.inner
    }
}

/// Wraps an oracle with a fresh counter (count 0, empty log).
pub fn counted<V: Valuation>(oracle: V) -> QueryCounter<V> {
    QueryCounter::new(oracle)
}

/// View a slice of concrete valuations as trait objects.
pub fn dyn_refs<V: Valuation>(valuations: &[V]) -> Vec<&dyn Valuation> {
    valuations.iter().map(|v| v as &dyn Valuation).collect()
}

impl<V: Valuation> Valuation for QueryCounter<V> {
    fn universe_size(&self) -> u32 {
        self.inner.universe_size()
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.log.lock().unwrap().push(bundle.clone());
        self.inner.value(bundle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::bundle_iter;

    fn cardinality_oracle(m: u32) -> impl Valuation {
        FnValuation { m, f: move |b: &Bundle| ExactValue::from_int(b.len() as i64) }
    }

    #[test]
    fn fresh_counter_is_zero() {
        let c = counted(cardinality_oracle(4));
        assert_eq!(c.count(), 0);
        assert!(c.log().is_empty());
    }

    #[test]
    fn counter_counts_and_logs_in_order() {
        let c = counted(cardinality_oracle(4));
        let q1 = Bundle::from_items(4, &[0]).unwrap();
        let q2 = Bundle::from_items(4, &[1, 2]).unwrap();
        let q3 = Bundle::full(4);
        for q in [&q1, &q2, &q3] {
            c.value(q);
        }
        assert_eq!(c.count(), 3);
        assert_eq!(c.log(), vec![q1, q2, q3]);
    }

    #[test]
    fn duplicates_are_counted() {
        let c = counted(cardinality_oracle(4));
        let q = Bundle::from_items(4, &[3]).unwrap();
        c.value(&q);
        c.value(&q);
        assert_eq!(c.count(), 2);
        assert_eq!(c.log().len(), 2);
    }

    #[test]
    fn counter_is_transparent() {
        let inner = cardinality_oracle(6);
        let c = counted(&inner);
        for b in bundle_iter(6, None).unwrap() {
            assert_eq!(c.value(&b), inner.value(&b));
        }
        assert_eq!(c.count(), 64);
    }
}
