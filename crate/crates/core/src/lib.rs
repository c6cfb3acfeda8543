//! Desk-scale testbed for menus, adversary games, and value-query lower
//! bounds in truthful combinatorial auctions and combinatorial public
//! projects.
//!
//! Everything is exact: bundles are bit sets, values and prices are
//! arbitrary-precision rationals, and every exhaustive procedure refuses to
//! run (rather than silently truncating) when the universe exceeds the
//! enumeration cap.
//!
//! Module map:
//! - [`bundle`], [`exact`], [`oracle`], [`allocation`]: foundational types —
//!   item sets, rational arithmetic, value-query oracles, query accounting.
//! - [`valuations`]: the concrete valuation families and their exhaustive
//!   structural checkers.
//! - [`mechanisms`]: brute-force VCG, greedy allocation, public-project
//!   solvers, and truthfulness auditing.
//! - [`menu`]: menu extraction via the taxation principle and structured
//!   submenu discovery.
//! - [`games`]: adversary games that force query blowup, plus goodness
//!   checking for randomized-to-deterministic reductions.
//! - [`prob`]: exact binomial/hypergeometric tails and rigorous
//!   Chernoff-bound comparisons.

pub mod allocation;
pub mod bundle;
pub mod exact;
pub mod mechanisms;
pub mod menu;
pub mod oracle;
pub mod prob;
pub mod seeds;
pub mod valuations;
pub mod games;

pub use allocation::{welfare, Allocation, AllocationError};
pub use bundle::{bundle_iter, ensure_enumerable, Bundle, BundleError, DEFAULT_ENUM_CAP};
pub use exact::ExactValue;
pub use oracle::{counted, QueryCounter, Valuation};

/// Library version embedded in experiment provenance records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
