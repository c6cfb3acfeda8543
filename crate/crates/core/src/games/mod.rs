//! The lower-bound games, executable against any query strategy.
//!
//! Four pieces of machinery:
//! - the hidden-star identification game, where an adaptive adversary keeps
//!   every unqueried submenu bundle alive as a candidate, forcing
//!   `|submenu| - 1` submenu queries;
//! - the target/flat distinguishing game for exact public projects, driven
//!   by a uniformly random hidden target;
//! - the expected-profit gap and output sampler that turn the
//!   truthful-in-expectation argument into checkable arithmetic;
//! - goodness checking and support search for the randomized-to-deterministic
//!   reduction.

mod distinguish;
mod goodness;
mod identify;
mod tie;

pub use distinguish::{
    distinguishing_game, random_subset_of_size, DistinguishMove, DistinguishReport,
    DistinguishStrategy, ExhaustiveSliceStrategy, FixedProbeStrategy, GuessStrategy, Verdict,
};
pub use goodness::{goodness_check, support_search, GoodnessReport, Instance, SupportSearchOutcome};
pub use identify::{
    cpp_identification_menu, enumerate_identification_game, identification_game, ImmediateCommit,
    verify_profit_argmax, GameTreeReport, IdentificationOutcome, ProfitWitness, ScanStrategy,
};
pub use tie::{
    sampler_miss_upper_bound, tie_profit_gap, tie_sampler, DistributionMechanism,
    DistributionOutcome, SamplerOutcome, SyntheticHitMechanism, TieGapReport,
};

use thiserror::Error;

use crate::bundle::{Bundle, BundleError};
use crate::exact::ExactValue;
use crate::mechanisms::MechError;
use crate::prob::ProbError;
use crate::valuations::ZooError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Mech(#[from] MechError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("malformed structured submenu: {0}")]
    MalformedSubmenu(String),
    #[error("strategy exhausted the move budget of {0}")]
    BudgetExhausted(u64),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid output distribution: {0}")]
    BadDistribution(String),
    #[error("expected-approximation precondition fails on instance {0}")]
    ExpectedApproximationFails(usize),
}

/// A move in a value-query game: ask for one bundle's value, or commit to an
/// answer bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyMove {
    Query(Bundle),
    Commit(Bundle),
}

/// An adaptive deterministic query strategy. The harness passes the full
/// history of (query, answer) pairs; the strategy must eventually commit
/// within the move budget of `2^m`.
pub trait QueryStrategy {
    fn next_move(&mut self, history: &[(Bundle, ExactValue)]) -> StrategyMove;
}
