//! Bundles of items as bit sets, plus capped exhaustive enumeration.
//!
//! A [`Bundle`] is a subset of the item universe `{0, .., m-1}`. The global
//! tie-breaking order used everywhere downstream is ascending bit-pattern
//! order (item 0 is the least significant bit), which [`Ord`] implements.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const WORD_BITS: u32 = 64;

/// Default ceiling on `m` for any procedure that loops over all `2^m` subsets.
pub const DEFAULT_ENUM_CAP: u32 = 24;

/// Environment variable overriding the enumeration cap (read once per process).
pub const ENUM_CAP_ENV: &str = "MECHLAB_ENUM_CAP";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("exhaustive enumeration refused: m = {m} exceeds cap {cap} (override via {ENUM_CAP_ENV})")]
    EnumerationRefused { m: u32, cap: u32 },
    #[error("item {item} outside universe of size {m}")]
    ItemOutOfRange { item: u32, m: u32 },
    #[error("bundles belong to different universes ({0} vs {1})")]
    UniverseMismatch(u32, u32),
}

/// Parses a cap override, falling back to the default on absence or garbage.
/// Clamped to 63 so enumerated patterns always fit one word.
pub fn cap_from_env_value(value: Option<&str>) -> u32 {
    value
        .and_then(|s| s.trim().parse::<u32>().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
        .min(63)
}

/// Process-wide enumeration cap: `MECHLAB_ENUM_CAP` if set, else 24.
pub fn enumeration_cap() -> u32 {
    static CAP: OnceLock<u32> = OnceLock::new();
    *CAP.get_or_init(|| cap_from_env_value(std::env::var(ENUM_CAP_ENV).ok().as_deref()))
}

/// Refuses loudly rather than truncating when `m` is too large to enumerate.
pub fn ensure_enumerable(m: u32) -> Result<(), BundleError> {
    let cap = enumeration_cap();
    if m > cap {
        Err(BundleError::EnumerationRefused { m, cap })
    } else {
        Ok(())
    }
}

/// A subset of `{0, .., m-1}` with bit-set semantics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bundle {
    universe: u32,
    words: Vec<u64>,
}

fn words_for(m: u32) -> usize {
    m.div_ceil(WORD_BITS).max(1) as usize
}

impl Bundle {
    pub fn empty(m: u32) -> Self {
        Bundle { universe: m, words: vec![0; words_for(m)] }
    }

    pub fn full(m: u32) -> Self {
        let mut b = Bundle::empty(m);
        for j in 0..m {
            b.insert_mut(j);
        }
        b
    }

    pub fn singleton(m: u32, item: u32) -> Result<Self, BundleError> {
        let mut b = Bundle::empty(m);
        if item >= m {
            return Err(BundleError::ItemOutOfRange { item, m });
        }
        b.insert_mut(item);
        Ok(b)
    }

    pub fn from_items(m: u32, items: &[u32]) -> Result<Self, BundleError> {
        let mut b = Bundle::empty(m);
        for &item in items {
            if item >= m {
                return Err(BundleError::ItemOutOfRange { item, m });
            }
            b.insert_mut(item);
        }
        Ok(b)
    }

    /// Builds a bundle over `m <= 64` items from its bit pattern.
    pub fn from_pattern(m: u32, pattern: u64) -> Self {
        debug_assert!(m <= 64);
        debug_assert!(m == 64 || pattern < (1u64 << m));
        let mut b = Bundle::empty(m);
        b.words[0] = pattern;
        b
    }

    /// Bit pattern as a `u64`; only valid for `m <= 64`.
    pub fn pattern(&self) -> u64 {
        debug_assert!(self.universe <= 64);
        self.words[0]
    }

    pub fn universe_size(&self) -> u32 {
        self.universe
    }

    pub fn contains(&self, item: u32) -> bool {
        item < self.universe
            && self.words[(item / WORD_BITS) as usize] >> (item % WORD_BITS) & 1 == 1
    }

    fn insert_mut(&mut self, item: u32) {
        self.words[(item / WORD_BITS) as usize] |= 1u64 << (item % WORD_BITS);
    }

    pub fn with_item(&self, item: u32) -> Result<Self, BundleError> {
        if item >= self.universe {
            return Err(BundleError::ItemOutOfRange { item, m: self.universe });
        }
        let mut b = self.clone();
        b.insert_mut(item);
        Ok(b)
    }

    pub fn without_item(&self, item: u32) -> Self {
        let mut b = self.clone();
        if item < b.universe {
            b.words[(item / WORD_BITS) as usize] &= !(1u64 << (item % WORD_BITS));
        }
        b
    }

    pub fn len(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn items(&self) -> impl Iterator<Item = u32> + '_ {
        let m = self.universe;
        (0..m).filter(move |&j| self.contains(j))
    }

    fn check_universe(&self, other: &Bundle) -> Result<(), BundleError> {
        if self.universe != other.universe {
            Err(BundleError::UniverseMismatch(self.universe, other.universe))
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        self.check_universe(other).expect("universe mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Bundle { universe: self.universe, words }
    }

    pub fn intersection(&self, other: &Bundle) -> Bundle {
        self.check_universe(other).expect("universe mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Bundle { universe: self.universe, words }
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        self.check_universe(other).expect("universe mismatch");
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        Bundle { universe: self.universe, words }
    }

    pub fn intersection_len(&self, other: &Bundle) -> u32 {
        self.check_universe(other).expect("universe mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum()
    }

    pub fn is_subset_of(&self, other: &Bundle) -> bool {
        self.check_universe(other).expect("universe mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_strict_superset_of(&self, other: &Bundle) -> bool {
        other.is_subset_of(self) && self != other
    }

    pub fn is_disjoint_from(&self, other: &Bundle) -> bool {
        self.check_universe(other).expect("universe mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Canonical text form: character `j` is `'1'` iff item `j` is a member,
    /// so the string length equals the universe size.
    pub fn to_bitstring(&self) -> String {
        (0..self.universe).map(|j| if self.contains(j) { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self, BundleParseError> {
        let m = s.chars().count() as u32;
        let mut b = Bundle::empty(m);
        for (j, c) in s.chars().enumerate() {
            match c {
                '1' => b.insert_mut(j as u32),
                '0' => {}
                _ => return Err(BundleParseError(s.to_string())),
            }
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("not a bundle bitstring: {0:?}")]
pub struct BundleParseError(pub String);

impl Ord for Bundle {
    /// Ascending bit-pattern order: compare as integers, most significant word first.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Bundle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for j in self.items() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
            first = false;
        }
        write!(f, "}}@{}", self.universe)
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Bundle::from_bitstring(&s).map_err(de::Error::custom)
    }
}

/// All subsets of `{0, .., m-1}` in ascending bit-pattern order, optionally
/// filtered to one cardinality. Refuses when `m` exceeds the enumeration cap.
pub fn bundle_iter(
    m: u32,
    size_filter: Option<u32>,
) -> Result<impl Iterator<Item = Bundle>, BundleError> {
    ensure_enumerable(m)?;
    let end: u64 = 1u64 << m;
    Ok((0..end).filter_map(move |pattern| {
        let b = Bundle::from_pattern(m, pattern);
        match size_filter {
            Some(k) if b.len() != k => None,
            _ => Some(b),
        }
    }))
}

/// All subsets of `of` (including the empty set and `of` itself) in ascending
/// bit-pattern order. Requires `m` within the cap; single-word universes only.
pub fn subsets_of(of: &Bundle) -> Result<Vec<Bundle>, BundleError> {
    let m = of.universe_size();
    ensure_enumerable(m)?;
    let set = of.pattern();
    let mut out = Vec::with_capacity(1 << of.len());
    // Carry-rippler enumeration of submasks, then sorted into pattern order.
    let mut sub: u64 = 0;
    loop {
        out.push(Bundle::from_pattern(m, sub));
        sub = sub.wrapping_sub(set) & set;
        if sub == 0 {
            break;
        }
    }
    out.sort();
    Ok(out)
}
