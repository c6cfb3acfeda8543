//! Mechanisms for combinatorial auctions and public projects, with
//! truthfulness auditing.
//!
//! The welfare maximizer enumerates every assignment of items to bidders
//! (items may stay unallocated — free disposal), so it is exact but
//! exponential; every caller goes through the enumeration cap. Payments
//! follow the Clarke pivot rule, which keeps them non-negative and prices
//! the empty outcome at zero. Ties everywhere break toward the
//! lexicographically smallest bit-pattern vector, so outcomes are
//! deterministic and menu extraction is well defined.

use thiserror::Error;

use crate::allocation::{Allocation, AllocationError};
use crate::bundle::{bundle_iter, ensure_enumerable, Bundle, BundleError};
use crate::exact::ExactValue;
use crate::oracle::Valuation;
use crate::valuations::value_table;

/// Upper bound on `(n+1)^m` assignment-search nodes.
const SEARCH_NODE_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MechError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error("no bidders")]
    NoBidders,
    #[error("assignment search needs {nodes} nodes, cap is {cap}")]
    SearchSpaceTooLarge { nodes: u64, cap: u64 },
    #[error("project size k = {k} exceeds m = {m}")]
    KTooLarge { k: u32, m: u32 },
    #[error("bidder {0} lives in universe {1}, expected {2}")]
    MixedUniverses(usize, u32, u32),
    #[error("bidder index {bidder} out of range for {n} bidders")]
    BadBidderIndex { bidder: usize, n: usize },
}

/// What one profile run produced: the bundle each bidder ends up valuing
/// (their own part in an auction, the chosen project for everyone in a CPP)
/// and the payment each bidder makes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileOutcome {
    pub received: Vec<Bundle>,
    pub payments: Vec<ExactValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    Auction,
    PublicProject,
}

/// A deterministic direct-revelation mechanism.
pub trait Mechanism: Sync {
    fn kind(&self) -> MechanismKind;

    fn execute(&self, valuations: &[&dyn Valuation]) -> Result<ProfileOutcome, MechError>;
}

/// A mechanism stripped down to its allocation rule, for welfare-only checks.
pub trait AllocationRule: Sync {
    fn allocate(&self, valuations: &[&dyn Valuation]) -> Result<Allocation, MechError>;
}

fn universe_of(valuations: &[&dyn Valuation]) -> Result<u32, MechError> {
    let first = valuations.first().ok_or(MechError::NoBidders)?;
    let m = first.universe_size();
    for (i, v) in valuations.iter().enumerate() {
        if v.universe_size() != m {
            return Err(MechError::MixedUniverses(i, v.universe_size(), m));
        }
    }
    Ok(m)
}

fn check_search_space(m: u32, n: usize) -> Result<(), MechError> {
    ensure_enumerable(m)?;
    match (n as u64 + 1).checked_pow(m) {
        Some(nodes) if nodes <= SEARCH_NODE_CAP => Ok(()),
        Some(nodes) => Err(MechError::SearchSpaceTooLarge { nodes, cap: SEARCH_NODE_CAP }),
        None => Err(MechError::SearchSpaceTooLarge { nodes: u64::MAX, cap: SEARCH_NODE_CAP }),
    }
}

/// Welfare-optimal owner assignment given per-bidder value tables indexed by
/// bit pattern. `skip` treats one bidder as absent. Returns the per-bidder
/// patterns and the optimal welfare.
fn optimal_from_tables(
    m: u32,
    tables: &[Vec<ExactValue>],
    skip: Option<usize>,
) -> (Vec<u64>, ExactValue) {
    let n = tables.len();
    let base = n as u64 + 1;
    let total = base.pow(m);
    let live = |i: usize| skip != Some(i);
    let mut best_patterns = vec![0u64; n];
    let mut best_welfare: ExactValue =
        (0..n).filter(|&i| live(i)).map(|i| &tables[i][0]).sum();
    let mut patterns = vec![0u64; n];
    for id in 1..total {
        patterns.iter_mut().for_each(|p| *p = 0);
        let mut rest = id;
        for j in 0..m {
            let owner = (rest % base) as usize;
            rest /= base;
            if owner > 0 {
                patterns[owner - 1] |= 1 << j;
            }
        }
        if let Some(i) = skip {
            if patterns[i] != 0 {
                continue; // absent bidders take nothing
            }
        }
        let w: ExactValue =
            (0..n).filter(|&i| live(i)).map(|i| &tables[i][patterns[i] as usize]).sum();
        if w > best_welfare || (w == best_welfare && patterns < best_patterns) {
            best_welfare = w;
            best_patterns = patterns.clone();
        }
    }
    (best_patterns, best_welfare)
}

fn tables_of(valuations: &[&dyn Valuation]) -> Result<Vec<Vec<ExactValue>>, BundleError> {
    valuations.iter().map(|v| value_table(*v)).collect()
}

/// Brute-force welfare maximization over all assignments of items to bidders.
pub fn optimal_allocation(
    valuations: &[&dyn Valuation],
) -> Result<(Allocation, ExactValue), MechError> {
    let m = universe_of(valuations)?;
    check_search_space(m, valuations.len())?;
    let tables = tables_of(valuations)?;
    let (patterns, w) = optimal_from_tables(m, &tables, None);
    let parts = patterns.iter().map(|&p| Bundle::from_pattern(m, p)).collect();
    Ok((Allocation::new(parts)?, w))
}

/// The VCG mechanism with Clarke pivot payments, computed by brute force.
pub struct VcgAuction;

impl Mechanism for VcgAuction {
    fn kind(&self) -> MechanismKind {
        MechanismKind::Auction
    }

    fn execute(&self, valuations: &[&dyn Valuation]) -> Result<ProfileOutcome, MechError> {
        let m = universe_of(valuations)?;
        let n = valuations.len();
        check_search_space(m, n)?;
        let tables = tables_of(valuations)?;
        let (patterns, welfare) = optimal_from_tables(m, &tables, None);
        let mut payments = Vec::with_capacity(n);
        for i in 0..n {
            let others_here = &welfare - &tables[i][patterns[i] as usize];
            let (_, others_opt) = optimal_from_tables(m, &tables, Some(i));
            let pay = &others_opt - &others_here;
            debug_assert!(!pay.is_negative(), "Clarke payment went negative");
            payments.push(pay);
        }
        let received = patterns.iter().map(|&p| Bundle::from_pattern(m, p)).collect();
        Ok(ProfileOutcome { received, payments })
    }
}

impl AllocationRule for VcgAuction {
    fn allocate(&self, valuations: &[&dyn Valuation]) -> Result<Allocation, MechError> {
        Ok(optimal_allocation(valuations)?.0)
    }
}

/// Runs the VCG auction, returning the allocation and payment vector.
pub fn vcg_auction(
    valuations: &[&dyn Valuation],
) -> Result<(Allocation, Vec<ExactValue>), MechError> {
    let outcome = VcgAuction.execute(valuations)?;
    Ok((Allocation::new(outcome.received)?, outcome.payments))
}

/// Greedy allocation: items in ascending index order, each assigned to the
/// bidder with the largest marginal value, ties to the lowest bidder index.
/// A 2-approximation for submodular bidders.
pub struct GreedyAuction;

impl AllocationRule for GreedyAuction {
    fn allocate(&self, valuations: &[&dyn Valuation]) -> Result<Allocation, MechError> {
        let m = universe_of(valuations)?;
        let n = valuations.len();
        let mut parts = vec![Bundle::empty(m); n];
        let mut held: Vec<ExactValue> =
            valuations.iter().map(|v| v.value(&Bundle::empty(m))).collect();
        for j in 0..m {
            let mut winner = 0usize;
            let mut winner_value = ExactValue::zero();
            let mut winner_gain: Option<ExactValue> = None;
            for i in 0..n {
                let extended = parts[i].with_item(j).expect("item within universe");
                let value = valuations[i].value(&extended);
                let gain = &value - &held[i];
                if winner_gain.as_ref().is_none_or(|best| gain > *best) {
                    winner = i;
                    winner_value = value;
                    winner_gain = Some(gain);
                }
            }
            parts[winner] = parts[winner].with_item(j).expect("item within universe");
            held[winner] = winner_value;
        }
        Ok(Allocation::new(parts)?)
    }
}

/// Convenience wrapper for [`GreedyAuction`].
pub fn greedy_auction(valuations: &[&dyn Valuation]) -> Result<Allocation, MechError> {
    GreedyAuction.allocate(valuations)
}

/// Greedy allocation charged at face value: each bidder pays their reported
/// value for what they receive. Deliberately not truthful; exists as the
/// counterexample mechanism for audits.
pub struct FirstPriceGreedy;

impl Mechanism for FirstPriceGreedy {
    fn kind(&self) -> MechanismKind {
        MechanismKind::Auction
    }

    fn execute(&self, valuations: &[&dyn Valuation]) -> Result<ProfileOutcome, MechError> {
        let alloc = GreedyAuction.allocate(valuations)?;
        let payments =
            valuations.iter().zip(alloc.parts()).map(|(v, part)| v.value(part)).collect();
        Ok(ProfileOutcome { received: alloc.parts().to_vec(), payments })
    }
}

/// Always allocates nothing; the degenerate baseline for goodness checks.
pub struct EmptyAllocation;

impl AllocationRule for EmptyAllocation {
    fn allocate(&self, valuations: &[&dyn Valuation]) -> Result<Allocation, MechError> {
        let m = universe_of(valuations)?;
        Ok(Allocation::empty(m, valuations.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CppMode {
    /// Chosen bundle has size exactly `k`.
    Exact,
    /// Chosen bundle has size at most `k`.
    Flexible,
}

fn cpp_candidates(m: u32, mode: CppMode, k: u32) -> Result<Vec<Bundle>, MechError> {
    if k > m {
        return Err(MechError::KTooLarge { k, m });
    }
    let all = bundle_iter(m, None)?;
    Ok(match mode {
        CppMode::Exact => all.filter(|b| b.len() == k).collect(),
        CppMode::Flexible => all.filter(|b| b.len() <= k).collect(),
    })
}

/// Brute-force public project selection: the bundle of size exactly/at most
/// `k` maximizing the sum of all bidders' values, smallest pattern on ties.
pub fn cpp_bruteforce(
    valuations: &[&dyn Valuation],
    mode: CppMode,
    k: u32,
) -> Result<Bundle, MechError> {
    let m = universe_of(valuations)?;
    let candidates = cpp_candidates(m, mode, k)?;
    let mut best: Option<(Bundle, ExactValue)> = None;
    for candidate in candidates {
        let total: ExactValue = valuations.iter().map(|v| v.value(&candidate)).sum();
        match &best {
            Some((_, w)) if total <= *w => {}
            _ => best = Some((candidate, total)),
        }
    }
    Ok(best.expect("candidate set nonempty").0)
}

/// Public project chooser with Clarke pivot payments: bidder `i` pays the
/// externality its presence imposes on the project choice.
pub struct CppVcg {
    pub mode: CppMode,
    pub k: u32,
}

impl Mechanism for CppVcg {
    fn kind(&self) -> MechanismKind {
        MechanismKind::PublicProject
    }

    fn execute(&self, valuations: &[&dyn Valuation]) -> Result<ProfileOutcome, MechError> {
        let m = universe_of(valuations)?;
        let n = valuations.len();
        let candidates = cpp_candidates(m, self.mode, self.k)?;
        let tables = tables_of(valuations)?;
        let argmax = |skip: Option<usize>| -> (u64, ExactValue) {
            let mut best_pattern = candidates[0].pattern();
            let mut best_total: ExactValue = (0..n)
                .filter(|&i| skip != Some(i))
                .map(|i| &tables[i][best_pattern as usize])
                .sum();
            for candidate in &candidates[1..] {
                let p = candidate.pattern();
                let total: ExactValue = (0..n)
                    .filter(|&i| skip != Some(i))
                    .map(|i| &tables[i][p as usize])
                    .sum();
                if total > best_total {
                    best_total = total;
                    best_pattern = p;
                }
            }
            (best_pattern, best_total)
        };
        let (chosen_pattern, _) = argmax(None);
        let chosen = Bundle::from_pattern(m, chosen_pattern);
        match self.mode {
            CppMode::Exact => assert_eq!(chosen.len(), self.k, "exact mode must output size k"),
            CppMode::Flexible => assert!(chosen.len() <= self.k, "flexible mode exceeded k"),
        }
        let mut payments = Vec::with_capacity(n);
        for i in 0..n {
            let others_here: ExactValue =
                (0..n).filter(|&j| j != i).map(|j| &tables[j][chosen_pattern as usize]).sum();
            let (_, others_opt) = argmax(Some(i));
            let pay = &others_opt - &others_here;
            debug_assert!(!pay.is_negative());
            payments.push(pay);
        }
        Ok(ProfileOutcome { received: vec![chosen; n], payments })
    }
}

/// One profitable misreport found by the audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthfulnessViolation {
    pub true_index: usize,
    pub misreport_index: usize,
    pub truthful_profit: ExactValue,
    pub misreport_profit: ExactValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthfulnessReport {
    pub bidder: usize,
    pub pairs_checked: u64,
    pub violations: Vec<TruthfulnessViolation>,
}

impl TruthfulnessReport {
    pub fn is_truthful(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every ordered pair `(v, v')` in the family, checks exactly that
/// truth-telling weakly beats the misreport:
/// `v(outcome(v)) - pay(v) >= v(outcome(v')) - pay(v')`.
/// Violations are report content, not errors.
pub fn truthfulness_audit(
    mech: &dyn Mechanism,
    family: &[&dyn Valuation],
    bidder: usize,
    opponents: &[&dyn Valuation],
) -> Result<TruthfulnessReport, MechError> {
    if bidder > opponents.len() {
        return Err(MechError::BadBidderIndex { bidder, n: opponents.len() + 1 });
    }
    let mut outcomes = Vec::with_capacity(family.len());
    for v in family {
        let mut profile: Vec<&dyn Valuation> = Vec::with_capacity(opponents.len() + 1);
        profile.extend_from_slice(&opponents[..bidder]);
        profile.push(*v);
        profile.extend_from_slice(&opponents[bidder..]);
        outcomes.push(mech.execute(&profile)?);
    }
    let mut violations = Vec::new();
    let mut pairs_checked = 0u64;
    for (a, truth) in family.iter().enumerate() {
        let honest =
            truth.value(&outcomes[a].received[bidder]) - outcomes[a].payments[bidder].clone();
        for b in 0..family.len() {
            if a == b {
                continue;
            }
            pairs_checked += 1;
            let deviating =
                truth.value(&outcomes[b].received[bidder]) - outcomes[b].payments[bidder].clone();
            if honest < deviating {
                violations.push(TruthfulnessViolation {
                    true_index: a,
                    misreport_index: b,
                    truthful_profit: honest.clone(),
                    misreport_profit: deviating,
                });
            }
        }
    }
    Ok(TruthfulnessReport { bidder, pairs_checked, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::welfare;
    use crate::exact::ExactValue;
    use crate::oracle::dyn_refs;
    use crate::valuations::{polar_family, random_polar, AdditiveValuation, ZeroValuation};

    #[test]
    fn vcg_two_bidder_example() {
        let v1 = AdditiveValuation::from_ints(&[3, 5]).unwrap();
        let v2 = AdditiveValuation::from_ints(&[4, 1]).unwrap();
        let vals: Vec<&dyn Valuation> = vec![&v1, &v2];
        let (alloc, payments) = vcg_auction(&vals).unwrap();
        assert_eq!(*alloc.part(0), Bundle::from_items(2, &[1]).unwrap());
        assert_eq!(*alloc.part(1), Bundle::from_items(2, &[0]).unwrap());
        assert_eq!(welfare(&alloc, &vals).unwrap(), ExactValue::from_int(9));
        // Clarke: bidder 0 displaces item 1 from v2 (worth 1); bidder 1
        // displaces item 0 from v1 (worth 3).
        assert_eq!(payments, vec![ExactValue::from_int(1), ExactValue::from_int(3)]);
    }

    #[test]
    fn vcg_single_bidder_pays_nothing() {
        let v = AdditiveValuation::from_ints(&[3, 5]).unwrap();
        let vals: Vec<&dyn Valuation> = vec![&v];
        let (alloc, payments) = vcg_auction(&vals).unwrap();
        assert_eq!(*alloc.part(0), Bundle::full(2));
        assert_eq!(payments, vec![ExactValue::zero()]);
    }

    #[test]
    fn vcg_all_zero_valuations_allocate_nothing() {
        let z = ZeroValuation { m: 3 };
        let vals: Vec<&dyn Valuation> = vec![&z, &z];
        let (alloc, payments) = vcg_auction(&vals).unwrap();
        assert_eq!(alloc, Allocation::empty(3, 2));
        assert!(payments.iter().all(|p| p.is_zero()));
    }

    #[test]
    fn greedy_matches_optimum_on_additive() {
        let v1 = AdditiveValuation::from_ints(&[3, 5, 2, 2]).unwrap();
        let v2 = AdditiveValuation::from_ints(&[4, 1, 2, 7]).unwrap();
        let vals: Vec<&dyn Valuation> = vec![&v1, &v2];
        let alloc = greedy_auction(&vals).unwrap();
        let (_, opt) = optimal_allocation(&vals).unwrap();
        assert_eq!(welfare(&alloc, &vals).unwrap(), opt);
    }

    #[test]
    fn greedy_on_all_zero_valuations_has_zero_welfare() {
        let z = ZeroValuation { m: 4 };
        let vals: Vec<&dyn Valuation> = vec![&z, &z];
        let alloc = greedy_auction(&vals).unwrap();
        assert_eq!(welfare(&alloc, &vals).unwrap(), ExactValue::zero());
    }

    #[test]
    fn greedy_half_optimal_on_random_polar() {
        let p = ExactValue::ratio(1, 2);
        for seed in 0..30 {
            let a = random_polar(6, &p, seed).unwrap();
            let b = random_polar(6, &p, 1_000 + seed).unwrap();
            let vals: Vec<&dyn Valuation> = vec![&a, &b];
            let alloc = greedy_auction(&vals).unwrap();
            let got = welfare(&alloc, &vals).unwrap();
            let (_, opt) = optimal_allocation(&vals).unwrap();
            assert!(&got + &got >= opt, "seed {seed}: {got} < half of {opt}");
        }
    }

    #[test]
    fn cpp_bruteforce_examples() {
        // One additive bidder, k = 2, item values (5, 3, 1): picks {0, 1}.
        let v = AdditiveValuation::from_ints(&[5, 3, 1]).unwrap();
        let vals: Vec<&dyn Valuation> = vec![&v];
        let chosen = cpp_bruteforce(&vals, CppMode::Exact, 2).unwrap();
        assert_eq!(chosen, Bundle::from_items(3, &[0, 1]).unwrap());

        // Flexible mode with all-zero valuations: the empty bundle wins ties.
        let z = ZeroValuation { m: 3 };
        let vals: Vec<&dyn Valuation> = vec![&z, &z];
        assert_eq!(cpp_bruteforce(&vals, CppMode::Flexible, 2).unwrap(), Bundle::empty(3));

        // Exact mode, polar bidder demanding item 2: ties resolve to {0, 2}.
        let polar = crate::valuations::PolarAdditiveValuation::new(
            Bundle::from_items(4, &[2]).unwrap(),
        )
        .unwrap();
        let vals: Vec<&dyn Valuation> = vec![&polar];
        assert_eq!(
            cpp_bruteforce(&vals, CppMode::Exact, 2).unwrap(),
            Bundle::from_items(4, &[0, 2]).unwrap()
        );
    }

    #[test]
    fn cpp_vcg_sizes_and_payments() {
        let v1 = AdditiveValuation::from_ints(&[5, 3, 1, 0]).unwrap();
        let v2 = AdditiveValuation::from_ints(&[0, 1, 4, 2]).unwrap();
        let vals: Vec<&dyn Valuation> = vec![&v1, &v2];
        let exact = CppVcg { mode: CppMode::Exact, k: 2 }.execute(&vals).unwrap();
        assert_eq!(exact.received[0].len(), 2);
        assert_eq!(exact.received[0], exact.received[1]);
        assert!(exact.payments.iter().all(|p| !p.is_negative()));
        let flex = CppVcg { mode: CppMode::Flexible, k: 2 }.execute(&vals).unwrap();
        assert!(flex.received[0].len() <= 2);
    }

    #[test]
    fn vcg_is_truthful_on_the_polar_family() {
        let m = 4;
        let family = polar_family(m).unwrap();
        let family_refs = dyn_refs(&family);
        let opponent = AdditiveValuation::from_ints(&[2, 1, 1, 3]).unwrap();
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let report = truthfulness_audit(&VcgAuction, &family_refs, 0, &opponents).unwrap();
        assert_eq!(report.pairs_checked, 16 * 15);
        assert!(report.is_truthful(), "violations: {:?}", report.violations);
    }

    #[test]
    fn cpp_vcg_is_truthful_on_the_polar_family() {
        for m in [4u32, 5] {
            let family = polar_family(m).unwrap();
            let family_refs = dyn_refs(&family);
            let polar_opp = crate::valuations::PolarAdditiveValuation::new(
                Bundle::from_items(m, &[1, 3]).unwrap(),
            )
            .unwrap();
            let zero_opp = ZeroValuation { m };
            let opponent_profiles: Vec<Vec<&dyn Valuation>> =
                vec![vec![&polar_opp], vec![&zero_opp]];
            for opponents in &opponent_profiles {
                for mode in [CppMode::Exact, CppMode::Flexible] {
                    let mech = CppVcg { mode, k: 2 };
                    let report = truthfulness_audit(&mech, &family_refs, 0, opponents).unwrap();
                    assert!(
                        report.is_truthful(),
                        "m={m} {mode:?}: {:?}",
                        report.violations.first()
                    );
                }
            }
        }
    }

    #[test]
    fn first_price_greedy_is_manipulable() {
        let truthful = AdditiveValuation::from_ints(&[10]).unwrap();
        let shaded = AdditiveValuation::from_ints(&[6]).unwrap();
        let opponent = AdditiveValuation::from_ints(&[5]).unwrap();
        let family: Vec<&dyn Valuation> = vec![&truthful, &shaded];
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let report = truthfulness_audit(&FirstPriceGreedy, &family, 0, &opponents).unwrap();
        assert!(!report.is_truthful());
        let v = &report.violations[0];
        assert_eq!((v.true_index, v.misreport_index), (0, 1));
        assert_eq!(v.misreport_profit, ExactValue::from_int(4));
    }

    #[test]
    fn audit_of_singleton_family_is_vacuous() {
        let v = AdditiveValuation::from_ints(&[1, 2]).unwrap();
        let family: Vec<&dyn Valuation> = vec![&v];
        let opp = ZeroValuation { m: 2 };
        let opponents: Vec<&dyn Valuation> = vec![&opp];
        let report = truthfulness_audit(&VcgAuction, &family, 0, &opponents).unwrap();
        assert_eq!(report.pairs_checked, 0);
        assert!(report.is_truthful());
    }

    #[test]
    fn search_space_guard() {
        let z = ZeroValuation { m: 20 };
        let vals: Vec<&dyn Valuation> = vec![&z; 4];
        assert!(matches!(
            optimal_allocation(&vals),
            Err(MechError::SearchSpaceTooLarge { .. })
        ));
    }
}
