//! Menus, the taxation principle, and structured submenus.
//!
//! Fixing a truthful mechanism and the opponents' valuations, each bundle a
//! bidder can be allocated carries one price, independent of the bidder's own
//! report. [`extract_menu`] materializes that price schedule by running the
//! mechanism over an explicit finite family of reports; two different
//! payments for one bundle falsify the taxation principle for the mechanism
//! and abort extraction.
//!
//! A structured submenu is a menu subset whose bundles share one size, sit in
//! a `1/m^5` price band, cost at most `m`, and whose strict supersets in the
//! menu cost at least `1/m^3` more. Discovery bins bundles by
//! `(size, floor(price * m^5))` and proposes the most congested bin, which an
//! independent checker then re-verifies condition by condition.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::Bundle;
use crate::exact::ExactValue;
use crate::mechanisms::{MechError, Mechanism, MechanismKind};
use crate::oracle::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MenuError {
    #[error(transparent)]
    Mech(#[from] MechError),
    #[error("taxation principle violated: bundle {bundle:?} priced {first} and {second}")]
    TaxationViolation { bundle: Bundle, first: ExactValue, second: ExactValue },
    #[error("menu is empty")]
    EmptyMenu,
    #[error("menu entry universe {0} does not match m = {1}")]
    UniverseMismatch(u32, u32),
}

/// Price schedule of one bidder for one fixed opponent profile. Bundles
/// absent from the map are unreachable (conceptually priced at infinity).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "MenuRepr", try_from = "MenuRepr")]
pub struct Menu {
    player: usize,
    opponents: String,
    entries: BTreeMap<Bundle, ExactValue>,
}

#[derive(Serialize, Deserialize, Clone)]
struct MenuRepr {
    player: usize,
    opponents: String,
    entries: Vec<MenuEntry>,
}

#[derive(Serialize, Deserialize, Clone)]
struct MenuEntry {
    bundle: Bundle,
    price: ExactValue,
}

impl From<Menu> for MenuRepr {
    fn from(menu: Menu) -> MenuRepr {
        MenuRepr {
            player: menu.player,
            opponents: menu.opponents,
            entries: menu
                .entries
                .into_iter()
                .map(|(bundle, price)| MenuEntry { bundle, price })
                .collect(),
        }
    }
}

impl TryFrom<MenuRepr> for Menu {
    type Error = MenuError;

    fn try_from(repr: MenuRepr) -> Result<Menu, MenuError> {
        let mut menu = Menu::new(repr.player, repr.opponents);
        for MenuEntry { bundle, price } in repr.entries {
            menu.record(bundle, price)?;
        }
        Ok(menu)
    }
}

impl Menu {
    pub fn new(player: usize, opponents: impl Into<String>) -> Self {
        Menu { player, opponents: opponents.into(), entries: BTreeMap::new() }
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn opponents_id(&self) -> &str {
        &self.opponents
    }

    /// Inserts a price observation; a second observation for the same bundle
    /// must agree exactly.
    pub fn record(&mut self, bundle: Bundle, price: ExactValue) -> Result<(), MenuError> {
        match self.entries.get(&bundle) {
            Some(existing) if *existing != price => Err(MenuError::TaxationViolation {
                bundle,
                first: existing.clone(),
                second: price,
            }),
            _ => {
                self.entries.insert(bundle, price);
                Ok(())
            }
        }
    }

    pub fn price(&self, bundle: &Bundle) -> Option<&ExactValue> {
        self.entries.get(bundle)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bundle, &ExactValue)> {
        self.entries.iter()
    }

    /// CSV rows `bundle,size,price`, bundles in pattern order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bundle,size,price\n");
        for (bundle, price) in &self.entries {
            out.push_str(&format!(
                "{},{},{}\n",
                bundle.to_bitstring(),
                bundle.len(),
                price.to_ratio_string()
            ));
        }
        out
    }
}

/// Runs `mech` once per family member with `opponents` fixed and the family
/// member in seat `bidder`, recording (received bundle -> payment). For
/// auctions the empty bundle is normalized to price zero up front, so a
/// mechanism charging for nothing is reported as a taxation violation.
pub fn extract_menu(
    mech: &dyn Mechanism,
    bidder: usize,
    opponents: &[&dyn Valuation],
    family: &[&dyn Valuation],
) -> Result<Menu, MenuError> {
    if bidder > opponents.len() {
        return Err(MenuError::Mech(MechError::BadBidderIndex {
            bidder,
            n: opponents.len() + 1,
        }));
    }
    let mut menu = Menu::new(bidder, describe_profile(opponents));
    if mech.kind() == MechanismKind::Auction {
        if let Some(first) = family.first() {
            menu.record(Bundle::empty(first.universe_size()), ExactValue::zero())?;
        }
    }
    for report in family {
        let mut profile: Vec<&dyn Valuation> = Vec::with_capacity(opponents.len() + 1);
        profile.extend_from_slice(&opponents[..bidder]);
        profile.push(*report);
        profile.extend_from_slice(&opponents[bidder..]);
        let outcome = mech.execute(&profile)?;
        menu.record(outcome.received[bidder].clone(), outcome.payments[bidder].clone())?;
    }
    Ok(menu)
}

fn describe_profile(opponents: &[&dyn Valuation]) -> String {
    format!("{}-opponents", opponents.len())
}

/// Violations found by [`check_claim_3_6`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Claim36Report {
    /// Reachable bundles priced above `m`.
    pub price_cap_violations: Vec<(Bundle, ExactValue)>,
    /// Pairs `S ⊂ T` whose price gap falls short of `1/m^3`.
    pub gap_violations: Vec<(Bundle, Bundle, ExactValue, ExactValue)>,
}

impl Claim36Report {
    pub fn passes(&self) -> bool {
        self.price_cap_violations.is_empty() && self.gap_violations.is_empty()
    }
}

/// Checks the two menu properties that polar-additive opponents force:
/// every price is at most `m`, and every strict superset inside the menu
/// costs at least `1/m^3` more. Violations are report content.
pub fn check_claim_3_6(menu: &Menu, m: u32) -> Result<Claim36Report, MenuError> {
    check_universe(menu, m)?;
    let cap = ExactValue::from_int(m as i64);
    let gap = ExactValue::inv_int_pow(m as u64, 3);
    let mut report = Claim36Report::default();
    for (bundle, price) in menu.iter() {
        if *price > cap {
            report.price_cap_violations.push((bundle.clone(), price.clone()));
        }
    }
    for (small, p_small) in menu.iter() {
        for (large, p_large) in menu.iter() {
            if large.is_strict_superset_of(small) && p_large < &(p_small + &gap) {
                report.gap_violations.push((
                    small.clone(),
                    large.clone(),
                    p_small.clone(),
                    p_large.clone(),
                ));
            }
        }
    }
    Ok(report)
}

fn check_universe(menu: &Menu, m: u32) -> Result<(), MenuError> {
    for (bundle, _) in menu.iter() {
        if bundle.universe_size() != m {
            return Err(MenuError::UniverseMismatch(bundle.universe_size(), m));
        }
    }
    Ok(())
}

/// A verified structured submenu: same-size bundles in a `1/m^5` price band,
/// each priced at most `m`, with the `1/m^3` superset gap against the menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredSubmenu {
    bundles: Vec<Bundle>,
    common_size: u32,
    price_band: (ExactValue, ExactValue),
}

impl StructuredSubmenu {
    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    pub fn common_size(&self) -> u32 {
        self.common_size
    }

    pub fn price_band(&self) -> (&ExactValue, &ExactValue) {
        (&self.price_band.0, &self.price_band.1)
    }
}

/// First violation of the four structured-submenu conditions, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Def32Violation {
    /// A proposed member carries no menu price.
    Unpriced(Bundle),
    /// Two members differ in price by more than `1/m^5`.
    PriceBand(Bundle, Bundle),
    /// A menu bundle strictly containing a member costs less than `1/m^3` more.
    SupersetGap { member: Bundle, superset: Bundle },
    /// A member costs more than `m`.
    PriceCap(Bundle),
    /// Two members differ in size.
    SizeMismatch(Bundle, Bundle),
}

/// Independent verifier for the four conditions, checked verbatim against the
/// ambient menu. Construction paths must not be trusted to imply these.
pub fn check_structured(bundles: &[Bundle], menu: &Menu, m: u32) -> Option<Def32Violation> {
    let band = ExactValue::inv_int_pow(m as u64, 5);
    let gap = ExactValue::inv_int_pow(m as u64, 3);
    let cap = ExactValue::from_int(m as i64);
    let price_of = |b: &Bundle| menu.price(b).cloned();
    for a in bundles {
        let pa = match price_of(a) {
            Some(p) => p,
            None => return Some(Def32Violation::Unpriced(a.clone())),
        };
        if pa > cap {
            return Some(Def32Violation::PriceCap(a.clone()));
        }
        for b in bundles {
            if a.len() != b.len() {
                return Some(Def32Violation::SizeMismatch(a.clone(), b.clone()));
            }
            if let Some(pb) = price_of(b) {
                if (&pa - &pb).abs() > band {
                    return Some(Def32Violation::PriceBand(a.clone(), b.clone()));
                }
            }
        }
        for (t, pt) in menu.iter() {
            if t.is_strict_superset_of(a) && pt < &(&pa + &gap) {
                return Some(Def32Violation::SupersetGap {
                    member: a.clone(),
                    superset: t.clone(),
                });
            }
        }
    }
    None
}

/// Histogram of menu entries over `(size, floor(price * m^5))` bins.
pub fn bin_histogram(menu: &Menu, m: u32) -> BTreeMap<(u32, BigInt), Vec<Bundle>> {
    let scale = ExactValue::int_pow(m as u64, 5);
    let mut bins: BTreeMap<(u32, BigInt), Vec<Bundle>> = BTreeMap::new();
    for (bundle, price) in menu.iter() {
        let bin = (price * &scale).floor_int();
        bins.entry((bundle.len(), bin)).or_default().push(bundle.clone());
    }
    bins
}

/// Bins the menu, proposes the most congested bin (ties to the smallest
/// `(size, bin)` key), and returns it as a [`StructuredSubmenu`] only if the
/// independent checker accepts all four conditions.
pub fn find_structured_submenu(
    menu: &Menu,
    m: u32,
) -> Result<Option<StructuredSubmenu>, MenuError> {
    if menu.is_empty() {
        return Err(MenuError::EmptyMenu);
    }
    check_universe(menu, m)?;
    let bins = bin_histogram(menu, m);
    let (_, best) = bins
        .iter()
        .max_by(|(ka, va), (kb, vb)| va.len().cmp(&vb.len()).then(kb.cmp(ka)))
        .expect("menu nonempty");
    if check_structured(best, menu, m).is_some() {
        return Ok(None);
    }
    let mut bundles = best.clone();
    bundles.sort();
    let prices: Vec<ExactValue> =
        bundles.iter().map(|b| menu.price(b).expect("checked priced").clone()).collect();
    let lo = prices.iter().min().expect("nonempty").clone();
    let hi = prices.iter().max().expect("nonempty").clone();
    Ok(Some(StructuredSubmenu {
        common_size: bundles[0].len(),
        bundles,
        price_band: (lo, hi),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactValue;
    use crate::mechanisms::VcgAuction;
    use crate::oracle::dyn_refs;
    use crate::valuations::{polar_family, AdditiveValuation};

    fn rich_vcg_menu() -> Menu {
        // Opponent values (3, 5); reports strong enough to win each bundle.
        let opponent = AdditiveValuation::from_ints(&[3, 5]).unwrap();
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let family: Vec<AdditiveValuation> = [
            [0i64, 0],
            [10, 0],
            [0, 10],
            [10, 10],
        ]
        .iter()
        .map(|vals| AdditiveValuation::from_ints(vals).unwrap())
        .collect();
        let family_refs = dyn_refs(&family);
        extract_menu(&VcgAuction, 0, &opponents, &family_refs).unwrap()
    }

    #[test]
    fn vcg_menu_prices_are_clarke_externalities() {
        let menu = rich_vcg_menu();
        assert_eq!(menu.len(), 4);
        let expect = [
            (Bundle::empty(2), 0i64),
            (Bundle::from_items(2, &[0]).unwrap(), 3),
            (Bundle::from_items(2, &[1]).unwrap(), 5),
            (Bundle::full(2), 8),
        ];
        for (bundle, price) in expect {
            assert_eq!(menu.price(&bundle), Some(&ExactValue::from_int(price)), "{bundle:?}");
        }
    }

    #[test]
    fn polar_family_cannot_reach_priced_bundles_here() {
        // Against an opponent worth (3, 5), no polar report (items worth 1 or
        // 1/8) ever wins an item, so the menu collapses to the free empty
        // bundle. Enlarging the family (previous test) only adds entries.
        let opponent = AdditiveValuation::from_ints(&[3, 5]).unwrap();
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let family = polar_family(2).unwrap();
        let family_refs = dyn_refs(&family);
        let menu = extract_menu(&VcgAuction, 0, &opponents, &family_refs).unwrap();
        assert_eq!(menu.len(), 1);
        assert_eq!(menu.price(&Bundle::empty(2)), Some(&ExactValue::zero()));
        // Family monotonicity: the rich menu contains this one at equal prices.
        let rich = rich_vcg_menu();
        for (bundle, price) in menu.iter() {
            assert_eq!(rich.price(bundle), Some(price));
        }
    }

    #[test]
    fn zero_opponents_price_everything_at_zero() {
        let opponent = crate::valuations::ZeroValuation { m: 3 };
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let family = polar_family(3).unwrap();
        let family_refs = dyn_refs(&family);
        let menu = extract_menu(&VcgAuction, 0, &opponents, &family_refs).unwrap();
        assert!(menu.iter().all(|(_, p)| p.is_zero()));
    }

    #[test]
    fn menus_extract_for_any_seat_and_reject_bad_seats() {
        let opponent = AdditiveValuation::from_ints(&[3, 5]).unwrap();
        let opponents: Vec<&dyn Valuation> = vec![&opponent];
        let family = polar_family(2).unwrap();
        let family_refs = dyn_refs(&family);
        // Seat 1 (opponent first) works symmetrically.
        let menu = extract_menu(&VcgAuction, 1, &opponents, &family_refs).unwrap();
        assert_eq!(menu.player(), 1);
        assert_eq!(menu.price(&Bundle::empty(2)), Some(&ExactValue::zero()));
        // Seat beyond the profile is an error, not a clamp.
        assert!(extract_menu(&VcgAuction, 2, &opponents, &family_refs).is_err());
    }

    #[test]
    fn taxation_violation_is_detected() {
        let mut menu = Menu::new(0, "synthetic");
        let b = Bundle::from_items(3, &[1]).unwrap();
        menu.record(b.clone(), ExactValue::one()).unwrap();
        let err = menu.record(b, ExactValue::from_int(2)).unwrap_err();
        assert!(matches!(err, MenuError::TaxationViolation { .. }));
    }

    #[test]
    fn claim_3_6_flags_high_prices_but_not_gaps_here() {
        let menu = rich_vcg_menu();
        let report = check_claim_3_6(&menu, 2).unwrap();
        // Prices 3, 5, 8 all exceed m = 2: property (1) fails without
        // polar-additive opponents, exactly as expected.
        assert_eq!(report.price_cap_violations.len(), 3);
        assert!(report.gap_violations.is_empty());
    }

    #[test]
    fn claim_3_6_vacuous_and_boundary_cases() {
        let m = 4;
        let mut menu = Menu::new(0, "synthetic");
        menu.record(Bundle::empty(m), ExactValue::zero()).unwrap();
        assert!(check_claim_3_6(&menu, m).unwrap().passes());

        let s = Bundle::from_items(m, &[0]).unwrap();
        let t = Bundle::from_items(m, &[0, 1]).unwrap();
        menu.record(s.clone(), ExactValue::one()).unwrap();
        menu.record(t.clone(), ExactValue::one() + ExactValue::ratio(1, 64)).unwrap();
        // Exactly 1/m^3 above is allowed...
        let boundary = check_claim_3_6(&menu, m).unwrap();
        assert!(
            boundary.gap_violations.iter().all(|(a, b, _, _)| (a, b) != (&s, &t)),
            "equality at the gap must pass"
        );
        // ...but one notch below is not.
        let mut tight = Menu::new(0, "synthetic");
        tight.record(s.clone(), ExactValue::one()).unwrap();
        tight.record(t.clone(), ExactValue::one() + ExactValue::ratio(1, 65)).unwrap();
        assert_eq!(check_claim_3_6(&tight, m).unwrap().gap_violations.len(), 1);
    }

    fn synthetic_menu(entries: &[(Bundle, ExactValue)]) -> Menu {
        let mut menu = Menu::new(0, "synthetic");
        for (b, p) in entries {
            menu.record(b.clone(), p.clone()).unwrap();
        }
        menu
    }

    #[test]
    fn most_congested_bin_becomes_the_submenu() {
        let m = 6;
        let one = ExactValue::one();
        let gap = ExactValue::inv_int_pow(m as u64, 3);
        let size2: Vec<Bundle> = [
            [0u32, 1],
            [0, 2],
            [1, 2],
            [0, 3],
        ]
        .iter()
        .map(|items| Bundle::from_items(m, items).unwrap())
        .collect();
        let mut entries: Vec<(Bundle, ExactValue)> =
            size2.iter().map(|b| (b.clone(), one.clone())).collect();
        entries.push((Bundle::from_items(m, &[0, 1, 2]).unwrap(), &one + &gap));
        entries.push((Bundle::from_items(m, &[5]).unwrap(), ExactValue::ratio(1, 2)));
        entries.push((Bundle::from_items(m, &[0, 1, 2, 3]).unwrap(), ExactValue::from_int(3)));
        entries.push((Bundle::empty(m), ExactValue::zero()));
        let menu = synthetic_menu(&entries);
        let submenu = find_structured_submenu(&menu, m).unwrap().unwrap();
        assert_eq!(submenu.len(), 4);
        assert_eq!(submenu.common_size(), 2);
        let mut expect = size2.clone();
        expect.sort();
        assert_eq!(submenu.bundles(), &expect[..]);
        assert_eq!(check_structured(submenu.bundles(), &menu, m), None);
    }

    #[test]
    fn all_distinct_sizes_give_singleton_submenu() {
        let m = 5;
        let entries = vec![
            (Bundle::from_items(m, &[0]).unwrap(), ExactValue::one()),
            (Bundle::from_items(m, &[1, 2]).unwrap(), ExactValue::from_int(2)),
            (Bundle::from_items(m, &[0, 1, 2]).unwrap(), ExactValue::from_int(3)),
        ];
        let menu = synthetic_menu(&entries);
        let submenu = find_structured_submenu(&menu, m).unwrap().unwrap();
        assert_eq!(submenu.len(), 1);
        // Ties between singleton bins break toward the smallest size.
        assert_eq!(submenu.common_size(), 1);
    }

    #[test]
    fn superset_gap_failure_yields_none() {
        let m = 4;
        let one = ExactValue::one();
        let entries = vec![
            (Bundle::from_items(m, &[0, 1]).unwrap(), one.clone()),
            (Bundle::from_items(m, &[2, 3]).unwrap(), one.clone()),
            (Bundle::from_items(m, &[0, 1, 2]).unwrap(), one.clone()),
        ];
        let menu = synthetic_menu(&entries);
        assert_eq!(find_structured_submenu(&menu, m).unwrap(), None);
    }

    #[test]
    fn empty_menu_is_an_error() {
        let menu = Menu::new(0, "synthetic");
        assert!(matches!(find_structured_submenu(&menu, 4), Err(MenuError::EmptyMenu)));
    }

    #[test]
    fn bin_count_stays_within_lattice_bound() {
        let menu = rich_vcg_menu();
        let m = 2u32;
        let bins = bin_histogram(&menu, m);
        let cap = (m as usize + 1) * (m.pow(6) as usize + 1);
        assert!(bins.len() <= cap);
    }

    #[test]
    fn menu_json_round_trip() {
        let menu = rich_vcg_menu();
        let json = serde_json::to_string(&menu).unwrap();
        assert!(json.contains(r#""bundle":"11""#));
        assert!(json.contains(r#""price":"8""#));
        let back: Menu = serde_json::from_str(&json).unwrap();
        assert_eq!(back, menu);
        let csv = menu.to_csv();
        assert!(csv.starts_with("bundle,size,price\n"));
        assert!(csv.contains("11,2,8"));
    }
}
