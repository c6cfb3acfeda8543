//! Concrete valuation families, their random generators, and exhaustive
//! structural checkers.
//!
//! The families here are exactly the ones the lower-bound arguments build:
//! additive and polar-additive bidders, the star construction over a
//! structured submenu, the target/flat pair for exact public projects, and
//! the identically-zero bidder.

mod checks;
mod star;
mod target;

pub use checks::{
    check_monotone, check_submodular, value_table, MonotonicityWitness, SubmodularityWitness,
};
pub use star::StarValuation;
pub use target::{ceil_rational_power, floor_rational_power, FlatValuation, TargetValuation};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{Bundle, BundleError};
use crate::exact::ExactValue;
use crate::oracle::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZooError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("universe must be nonempty")]
    EmptyUniverse,
    #[error("item value at index {0} is negative")]
    NegativeItemValue(usize),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(ExactValue),
    #[error("probability denominator too large for exact sampling")]
    ProbabilityDenominatorTooLarge,
    #[error("submenu is empty")]
    EmptySubmenu,
    #[error("submenu member {0:?} has size {1}, expected {2}")]
    SubmenuSizeMismatch(Bundle, u32, u32),
    #[error("star bundle is not a member of the submenu")]
    StarNotInSubmenu,
    #[error("bundle size k = {k} outside 1..={m}")]
    BadCommonSize { k: u32, m: u32 },
    #[error("t = {t} does not exceed m * 2^m = {bound}")]
    TooSmallT { t: ExactValue, bound: BigInt },
    #[error("m = {0} is not a perfect square")]
    NotPerfectSquare(u32),
    #[error("target has size {got}, expected sqrt(m) = {want}")]
    BadTargetSize { got: u32, want: u32 },
    #[error("exponent {0} outside the supported range")]
    BadExponent(ExactValue),
    #[error("monotonicity and lattice submodularity checks disagree: {0}")]
    DefinitionMismatch(String),
}

/// Additive valuation with non-negative per-item values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveValuation {
    per_item: Vec<ExactValue>,
}

impl AdditiveValuation {
    pub fn new(per_item: Vec<ExactValue>) -> Result<Self, ZooError> {
        if per_item.is_empty() {
            return Err(ZooError::EmptyUniverse);
        }
        if let Some(i) = per_item.iter().position(|v| v.is_negative()) {
            return Err(ZooError::NegativeItemValue(i));
        }
        Ok(AdditiveValuation { per_item })
    }

    pub fn from_ints(per_item: &[i64]) -> Result<Self, ZooError> {
        AdditiveValuation::new(per_item.iter().map(|&v| ExactValue::from_int(v)).collect())
    }

    pub fn item_value(&self, item: u32) -> &ExactValue {
        &self.per_item[item as usize]
    }
}

impl Valuation for AdditiveValuation {
    fn universe_size(&self) -> u32 {
        self.per_item.len() as u32
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        bundle.items().map(|j| &self.per_item[j as usize]).sum()
    }
}

/// Polar additive valuation: every item is worth 1 (demanded) or `1/m^3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolarAdditiveValuation {
    demanded: Bundle,
    low: ExactValue,
}

impl PolarAdditiveValuation {
    pub fn new(demanded: Bundle) -> Result<Self, ZooError> {
        let m = demanded.universe_size();
        if m == 0 {
            return Err(ZooError::EmptyUniverse);
        }
        Ok(PolarAdditiveValuation { low: ExactValue::inv_int_pow(m as u64, 3), demanded })
    }

    pub fn demanded(&self) -> &Bundle {
        &self.demanded
    }

    pub fn demands(&self, item: u32) -> bool {
        self.demanded.contains(item)
    }
}

impl Valuation for PolarAdditiveValuation {
    fn universe_size(&self) -> u32 {
        self.demanded.universe_size()
    }

    fn value(&self, bundle: &Bundle) -> ExactValue {
        let hot = bundle.intersection_len(&self.demanded);
        let cold = bundle.len() - hot;
        ExactValue::from_int(hot as i64) + ExactValue::from_int(cold as i64) * &self.low
    }
}

/// The identically-zero valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroValuation {
    pub m: u32,
}

impl Valuation for ZeroValuation {
    fn universe_size(&self) -> u32 {
        self.m
    }

    fn value(&self, _bundle: &Bundle) -> ExactValue {
        ExactValue::zero()
    }
}

/// Draws a polar additive valuation: each item is demanded independently
/// with probability `p` (an exact rational). Deterministic given the seed.
pub fn random_polar(m: u32, p: &ExactValue, seed: u64) -> Result<PolarAdditiveValuation, ZooError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_polar_with(m, p, &mut rng)
}

/// As [`random_polar`] but advancing a caller-owned RNG; used by experiment
/// drivers that derive one RNG stream per trial.
pub fn random_polar_with(
    m: u32,
    p: &ExactValue,
    rng: &mut ChaCha8Rng,
) -> Result<PolarAdditiveValuation, ZooError> {
    if p.is_negative() || *p > 1 {
        return Err(ZooError::BadProbability(p.clone()));
    }
    let num = p.numer().to_u64().ok_or(ZooError::ProbabilityDenominatorTooLarge)?;
    let den = p.denom().to_u64().ok_or(ZooError::ProbabilityDenominatorTooLarge)?;
    let mut items = Vec::new();
    for j in 0..m {
        // Exact Bernoulli(num/den): uniform draw below den, success below num.
        if rng.gen_range(0..den) < num {
            items.push(j);
        }
    }
    PolarAdditiveValuation::new(Bundle::from_items(m, &items)?)
}

/// Serializable description of a valuation; `instantiate` validates and
/// builds the oracle. This is the canonical JSON form used in experiment
/// records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationSpec {
    Additive { values: Vec<ExactValue> },
    Polar { demanded: Bundle },
    Star { m: u32, k: u32, submenu: Vec<Bundle>, star: Bundle, t: ExactValue },
    Target { m: u32, target: Bundle, epsilon: ExactValue },
    Flat { m: u32 },
    Zero { m: u32 },
}

impl ValuationSpec {
    pub fn instantiate(&self) -> Result<Box<dyn Valuation>, ZooError> {
        match self {
            ValuationSpec::Additive { values } => {
                Ok(Box::new(AdditiveValuation::new(values.clone())?))
            }
            ValuationSpec::Polar { demanded } => {
                Ok(Box::new(PolarAdditiveValuation::new(demanded.clone())?))
            }
            ValuationSpec::Star { m, k, submenu, star, t } => Ok(Box::new(StarValuation::new(
                *m,
                *k,
                submenu.clone(),
                star.clone(),
                t.clone(),
            )?)),
            ValuationSpec::Target { m, target, epsilon } => {
                Ok(Box::new(TargetValuation::new(*m, target.clone(), epsilon.clone())?))
            }
            ValuationSpec::Flat { m } => Ok(Box::new(FlatValuation::new(*m)?)),
            ValuationSpec::Zero { m } => Ok(Box::new(ZeroValuation { m: *m })),
        }
    }
}

/// All `2^m` polar-additive valuations, ordered by the demanded set's bit
/// pattern. This is the family the menu arguments quantify over.
pub fn polar_family(m: u32) -> Result<Vec<PolarAdditiveValuation>, ZooError> {
    crate::bundle::bundle_iter(m, None)?
        .map(PolarAdditiveValuation::new)
        .collect()
}
