//! Reverse iterative combinatorial auction.
//!
//! Resource units bid for packages of D2D pairs under linear anonymous
//! prices: a package costs the sum of its item prices, the same for every
//! bidder. Each round every remaining bidder names at most one package
//! (XOR bidding) whose valuation covers its price. Then:
//!
//! - items nobody asks for get cheaper by `delta` (down to zero, after which
//!   they are retired unsold);
//! - items asked for by two or more bidders get dearer by
//!   `delta / fine_tune_divisor` and demand is collected again, within the
//!   same round, until the conflict clears;
//! - conflict-free bids win immediately. The winner's item prices freeze and
//!   it leaves the auction.
//!
//! The auction ends once every item is sold or retired, or every bidder has
//! won.
//!
//! A fine-tune step that would leave a contested item with no demand at all
//! is not applied. The contested items then go to bidders in index order at
//! the current prices, skipping bids that overlap an earlier award. The same
//! award happens when `max_fine_tune_rounds` steps did not clear the
//! conflict.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rate::{Allocation, Package, ValuationTable};

/// Relative tolerance for floating-point identity checks.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Price below which a descending price is snapped to zero, relative to
/// the step.
const ZERO_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPricePolicy {
    /// Each item opens at its highest single-item valuation plus `delta`.
    /// If some multi-item package would still be affordable, every price
    /// is raised uniformly until the opening round is quiet.
    AboveSingletons,
    /// Every item opens at the given price.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionConfig {
    pub initial_prices: InitialPricePolicy,
    /// Descending step.
    pub delta: f64,
    /// The ascending step is `delta / fine_tune_divisor`.
    pub fine_tune_divisor: u32,
    /// Fine-tune steps allowed per round before the deterministic award.
    pub max_fine_tune_rounds: usize,
    /// Hard cap on rounds; `None` derives one from the opening prices.
    pub max_rounds: Option<usize>,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        AuctionConfig {
            initial_prices: InitialPricePolicy::AboveSingletons,
            delta: 0.1,
            fine_tune_divisor: 10,
            max_fine_tune_rounds: 10_000,
            max_rounds: None,
        }
    }
}

impl AuctionConfig {
    pub fn fine_tune_step(&self) -> f64 {
        self.delta / f64::from(self.fine_tune_divisor)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if self.fine_tune_divisor == 0 {
            return Err(Error::InvalidConfig(
                "fine_tune_divisor must be at least 1".into(),
            ));
        }
        if let InitialPricePolicy::Fixed(p) = self.initial_prices {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidConfig(
                    "fixed initial price must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Item prices plus the frozen flag of every sold item.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector {
    pub prices: Vec<f64>,
    pub fixed: Vec<bool>,
    /// Number of descending steps taken so far.
    pub round: usize,
}

impl PriceVector {
    pub fn new(prices: Vec<f64>) -> Self {
        let n = prices.len();
        PriceVector {
            prices,
            fixed: alloc::vec![false; n],
            round: 0,
        }
    }

    pub fn price(&self, item: usize) -> f64 {
        self.prices[item]
    }

    /// Linear anonymous price of a package.
    pub fn package_price(&self, package: Package) -> f64 {
        package.members().map(|d| self.prices[d]).sum()
    }

    /// Lowers every item in `items` by `delta`, floored at zero, and
    /// advances the round. Items already at zero are not lowered; they are
    /// returned as the retired set instead.
    pub fn descend(&mut self, items: u64, delta: f64) -> u64 {
        let mut retired = 0;
        for d in mask_items(items) {
            debug_assert!(!self.fixed[d], "descending a sold item");
            if self.prices[d] <= 0.0 {
                retired |= 1 << d;
                continue;
            }
            let next = self.prices[d] - delta;
            self.prices[d] = if next <= ZERO_SNAP * delta { 0.0 } else { next };
        }
        self.round += 1;
        retired
    }

    /// Raises every item in `items` by `step`. The round does not advance.
    pub fn ascend(&mut self, items: u64, step: f64) {
        for d in mask_items(items) {
            debug_assert!(!self.fixed[d], "ascending a sold item");
            self.prices[d] += step;
        }
    }
}

fn mask_items(mask: u64) -> impl Iterator<Item = usize> {
    Package::from_mask(mask)
        .into_iter()
        .flat_map(Package::members)
}

/// Opening prices under `policy`.
pub fn initial_prices(
    table: &ValuationTable,
    policy: InitialPricePolicy,
    delta: f64,
) -> PriceVector {
    let n = table.num_pairs;
    match policy {
        InitialPricePolicy::Fixed(p) => PriceVector::new(alloc::vec![p; n]),
        InitialPricePolicy::AboveSingletons => {
            let mut prices = alloc::vec![0.0_f64; n];
            for (k, pkg) in table.packages.iter().enumerate() {
                if pkg.len() == 1 {
                    let d = pkg.members().next().unwrap_or(0);
                    for row in &table.values {
                        prices[d] = prices[d].max(row[k]);
                    }
                }
            }
            prices.iter_mut().for_each(|p| *p += delta);

            // Uniform raise that makes every package strictly unaffordable.
            let mut shift = f64::NEG_INFINITY;
            for row in &table.values {
                for (k, pkg) in table.packages.iter().enumerate() {
                    if row[k] <= 0.0 {
                        continue;
                    }
                    let price: f64 = pkg.members().map(|d| prices[d]).sum();
                    shift = shift.max((row[k] - price) / pkg.len() as f64);
                }
            }
            if shift >= 0.0 {
                prices.iter_mut().for_each(|p| *p += shift + delta);
            }
            PriceVector::new(prices)
        }
    }
}

/// A bidder's demand in one collection: a package at its current price,
/// or nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bid {
    pub bidder: usize,
    /// Table index and members of the demanded package.
    pub package: Option<(usize, Package)>,
    pub pay_price: f64,
}

impl Bid {
    pub fn empty(bidder: usize) -> Self {
        Bid {
            bidder,
            package: None,
            pay_price: 0.0,
        }
    }

    pub fn mask(&self) -> u64 {
        self.package.map_or(0, |(_, p)| p.mask())
    }

    pub fn is_empty(&self) -> bool {
        self.package.is_none()
    }
}

/// Truthful demand of bidder `c`: among packages built only from
/// `active_items` whose positive valuation covers the price, the one with
/// the highest utility. Ties go to the higher valuation, then to the lower
/// package index.
pub fn demand(c: usize, prices: &PriceVector, table: &ValuationTable, active_items: u64) -> Bid {
    let mut best: Option<(usize, Package, f64, f64, f64)> = None;
    for (k, &pkg) in table.packages.iter().enumerate() {
        if !pkg.is_subset_of_mask(active_items) {
            continue;
        }
        let v = table.values[c][k];
        if v <= 0.0 {
            continue;
        }
        let pay = prices.package_price(pkg);
        let utility = v - pay;
        if utility < 0.0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, _, bu, bv, _)) => utility > bu || (utility == bu && v > bv),
        };
        if better {
            best = Some((k, pkg, utility, v, pay));
        }
    }
    match best {
        Some((k, pkg, _, _, pay)) => Bid {
            bidder: c,
            package: Some((k, pkg)),
            pay_price: pay,
        },
        None => Bid::empty(c),
    }
}

/// Items named by two or more bids, as a mask.
pub fn detect_conflicts(bids: &[Bid]) -> u64 {
    let mut seen = 0u64;
    let mut twice = 0u64;
    for b in bids {
        let m = b.mask();
        twice |= seen & m;
        seen |= m;
    }
    twice
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Descend,
    Ascend,
    Fixed,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Descend => "descend",
            Phase::Ascend => "ascend",
            Phase::Fixed => "fixed",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One price change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEvent {
    pub index: usize,
    /// Descending round in which the change happened.
    pub round: usize,
    pub item: usize,
    pub price: f64,
    pub phase: Phase,
}

/// What a bidder sees when asked for its bid.
#[derive(Debug, Clone, Copy)]
pub struct BidContext<'a> {
    pub bidder: usize,
    pub round: usize,
    /// Fine-tune steps already taken in this round.
    pub fine_tune_step: usize,
    pub prices: &'a PriceVector,
    pub active_items: u64,
    pub table: &'a ValuationTable,
}

/// Decides which package (by table index) a bidder asks for. The engine
/// always charges the current package price; packages that are not made of
/// active items are ignored.
pub trait BiddingStrategy {
    fn choose(&mut self, ctx: &BidContext<'_>, truthful: &Bid) -> Option<usize>;
}

/// Report true demand every time.
#[derive(Debug, Clone, Copy, Default)]
pub struct Truthful;

impl BiddingStrategy for Truthful {
    fn choose(&mut self, _ctx: &BidContext<'_>, truthful: &Bid) -> Option<usize> {
        truthful.package.map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub allocation: Allocation,
    /// Table index of each winner's package.
    pub package_index: Vec<Option<usize>>,
    /// What each bidder pays; zero for bidders that won nothing.
    pub pay_prices: Vec<f64>,
    pub revenue: f64,
    /// Valuation minus pay price, zero for bidders that won nothing.
    pub utilities: Vec<f64>,
    /// Descending steps taken.
    pub rounds: usize,
    /// Demand collections (rounds plus fine-tune repeats).
    pub collections: usize,
    /// Largest number of fine-tune steps taken within one round.
    pub max_fine_tune_steps: usize,
    /// Rounds resolved by the deterministic index-order award.
    pub deterministic_awards: usize,
    pub initial_prices: Vec<f64>,
    pub final_prices: PriceVector,
    /// Every price change in order.
    pub price_history: Vec<PriceEvent>,
    /// Prices at the end of each round.
    pub round_prices: Vec<Vec<f64>>,
    /// Items left unsold, as a mask.
    pub unsold: u64,
}

impl AuctionOutcome {
    pub fn total_utility(&self) -> f64 {
        self.utilities.iter().sum()
    }

    /// Upper bound on descending rounds: every item reaches zero after
    /// `ceil(p0 / delta)` steps and is retired one step later.
    pub fn descent_bound(&self, delta: f64) -> usize {
        self.initial_prices
            .iter()
            .map(|p| libm::ceil(p / delta) as usize)
            .max()
            .unwrap_or(0)
            + 1
    }
}

/// Mutable state of a running auction.
#[derive(Debug, Clone)]
pub struct AuctionState {
    pub prices: PriceVector,
    pub active_items: u64,
    pub active_bidders: Vec<bool>,
    pub allocation: Allocation,
    pub package_index: Vec<Option<usize>>,
    pub pay_prices: Vec<f64>,
    pub history: Vec<PriceEvent>,
}

impl AuctionState {
    pub fn new(num_bidders: usize, prices: PriceVector) -> Self {
        let n = prices.prices.len();
        let active_items = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        AuctionState {
            prices,
            active_items,
            active_bidders: alloc::vec![true; num_bidders],
            allocation: Allocation::empty(num_bidders),
            package_index: alloc::vec![None; num_bidders],
            pay_prices: alloc::vec![0.0; num_bidders],
            history: Vec::new(),
        }
    }

    fn record(&mut self, item: usize, phase: Phase) {
        self.history.push(PriceEvent {
            index: self.history.len(),
            round: self.prices.round,
            item,
            price: self.prices.prices[item],
            phase,
        });
    }

    pub fn has_active_bidder(&self) -> bool {
        self.active_bidders.iter().any(|&a| a)
    }

    /// Lowers undemanded active items and retires the ones already at zero.
    pub fn descend_prices(&mut self, undemanded: u64, delta: f64) {
        let items = undemanded & self.active_items;
        let retired = self.prices.descend(items, delta);
        let round = self.prices.round;
        for d in mask_items(items & !retired) {
            self.history.push(PriceEvent {
                index: self.history.len(),
                round,
                item: d,
                price: self.prices.prices[d],
                phase: Phase::Descend,
            });
        }
        self.active_items &= !retired;
    }

    pub fn ascend_prices(&mut self, over_demanded: u64, step: f64) {
        self.prices.ascend(over_demanded, step);
        for d in mask_items(over_demanded) {
            self.record(d, Phase::Ascend);
        }
    }

    /// Awards every non-empty bid, freezes its item prices and removes the
    /// winner and its items from the auction.
    pub fn fix_winners(&mut self, bids: &[Bid]) -> Result<()> {
        if detect_conflicts(bids) != 0 {
            return Err(Error::Invariant(
                "fix_winners given overlapping bids".into(),
            ));
        }
        for b in bids {
            let Some((k, pkg)) = b.package else { continue };
            if !pkg.is_subset_of_mask(self.active_items) || !self.active_bidders[b.bidder] {
                return Err(Error::Invariant(
                    "winning bid on an inactive item or bidder".into(),
                ));
            }
            self.allocation.0[b.bidder] = Some(pkg);
            self.package_index[b.bidder] = Some(k);
            self.pay_prices[b.bidder] = b.pay_price;
            self.active_bidders[b.bidder] = false;
            self.active_items &= !pkg.mask();
            for d in pkg.members() {
                self.prices.fixed[d] = true;
                self.record(d, Phase::Fixed);
            }
        }
        Ok(())
    }

    fn collect<S: BiddingStrategy + ?Sized>(
        &self,
        prices: &PriceVector,
        table: &ValuationTable,
        step: usize,
        strategy: &mut S,
    ) -> Vec<Bid> {
        (0..self.active_bidders.len())
            .filter(|&c| self.active_bidders[c])
            .map(|c| {
                let truthful = demand(c, prices, table, self.active_items);
                let ctx = BidContext {
                    bidder: c,
                    round: prices.round,
                    fine_tune_step: step,
                    prices,
                    active_items: self.active_items,
                    table,
                };
                match strategy.choose(&ctx, &truthful) {
                    Some(k) if k == truthful.package.map_or(usize::MAX, |(tk, _)| tk) => truthful,
                    Some(k) if k < table.packages.len() => {
                        let pkg = table.packages[k];
                        if pkg.is_subset_of_mask(self.active_items) {
                            Bid {
                                bidder: c,
                                package: Some((k, pkg)),
                                pay_price: prices.package_price(pkg),
                            }
                        } else {
                            Bid::empty(c)
                        }
                    }
                    _ => Bid::empty(c),
                }
            })
            .collect()
    }
}

/// Accepts bids in bidder order, skipping any that overlap an earlier one.
fn award_in_index_order(bids: &[Bid]) -> Vec<Bid> {
    let mut taken = 0u64;
    bids.iter()
        .filter(|b| {
            let m = b.mask();
            if m != 0 && m & taken == 0 {
                taken |= m;
                true
            } else {
                false
            }
        })
        .copied()
        .collect()
}

pub fn run_auction(table: &ValuationTable, config: &AuctionConfig) -> Result<AuctionOutcome> {
    run_auction_with(table, config, &mut Truthful)
}

/// Runs the auction with bids chosen by `strategy`.
pub fn run_auction_with<S: BiddingStrategy + ?Sized>(
    table: &ValuationTable,
    config: &AuctionConfig,
    strategy: &mut S,
) -> Result<AuctionOutcome> {
    config.validate()?;
    let step = config.fine_tune_step();
    let opening = initial_prices(table, config.initial_prices, config.delta);
    let initial = opening.prices.clone();
    let bound = initial
        .iter()
        .map(|p| libm::ceil(p / config.delta) as usize)
        .max()
        .unwrap_or(0)
        + 1;
    let guard = config
        .max_rounds
        .unwrap_or_else(|| 2 * bound + 2 * (table.num_bidders() + table.num_pairs) + 16);

    let mut state = AuctionState::new(table.num_bidders(), opening);
    let mut round_prices = Vec::new();
    let mut collections = 0;
    let mut max_fine_tune_steps = 0;
    let mut deterministic_awards = 0;
    let mut iterations = 0;

    while state.active_items != 0 && state.has_active_bidder() {
        iterations += 1;
        if iterations > guard {
            return Err(Error::NonTermination(guard));
        }

        let mut bids = state.collect(&state.prices, table, 0, strategy);
        collections += 1;
        let mut steps = 0;
        let awarded = loop {
            let conflicts = detect_conflicts(&bids);
            if conflicts == 0 {
                break bids
                    .iter()
                    .filter(|b| !b.is_empty())
                    .copied()
                    .collect::<Vec<_>>();
            }
            if steps >= config.max_fine_tune_rounds {
                deterministic_awards += 1;
                break award_in_index_order(&bids);
            }
            let mut raised = state.prices.clone();
            raised.ascend(conflicts, step);
            let next = state.collect(&raised, table, steps + 1, strategy);
            collections += 1;
            let still_wanted = next.iter().fold(0, |m, b| m | b.mask());
            if conflicts & !still_wanted != 0 {
                // The step would leave a contested item with no demand.
                deterministic_awards += 1;
                break award_in_index_order(&bids);
            }
            state.ascend_prices(conflicts, step);
            bids = next;
            steps += 1;
        };
        max_fine_tune_steps = max_fine_tune_steps.max(steps);

        // Only the conflict-free bid set counts as demand, so every item
        // is either sold or lowered in each round.
        let demanded = awarded.iter().fold(0, |m, b| m | b.mask());
        state.fix_winners(&awarded)?;
        if state.active_items != 0 && state.has_active_bidder() {
            let undemanded = state.active_items & !demanded;
            if undemanded != 0 {
                state.descend_prices(undemanded, config.delta);
            }
        }
        round_prices.push(state.prices.prices.clone());
    }

    let utilities: Vec<f64> = (0..table.num_bidders())
        .map(|c| state.package_index[c].map_or(0.0, |k| table.values[c][k] - state.pay_prices[c]))
        .collect();
    let revenue = state.pay_prices.iter().sum();
    let all_items = if table.num_pairs >= 64 {
        u64::MAX
    } else {
        (1u64 << table.num_pairs) - 1
    };
    let unsold = all_items & !state.allocation.served_mask();
    Ok(AuctionOutcome {
        allocation: state.allocation,
        package_index: state.package_index,
        pay_prices: state.pay_prices,
        revenue,
        utilities,
        rounds: state.prices.round,
        collections,
        max_fine_tune_steps,
        deterministic_awards,
        initial_prices: initial,
        final_prices: state.prices,
        price_history: state.history,
        round_prices,
        unsold,
    })
}

/// Sum of the winners' valuations, checked against revenue plus total
/// utility.
pub fn overall_gain(outcome: &AuctionOutcome, table: &ValuationTable) -> Result<f64> {
    let gain = table.overall_gain(&outcome.allocation)?;
    let split = outcome.revenue + outcome.total_utility();
    if !approx_eq(gain, split, IDENTITY_TOLERANCE) {
        return Err(Error::Invariant(alloc::format!(
            "allocated valuations {gain} differ from revenue plus utilities {split}"
        )));
    }
    Ok(gain)
}

pub(crate) fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::package_universe;
    use alloc::vec;

    fn pk(items: &[usize]) -> Package {
        Package::from_pairs(items).unwrap()
    }

    /// Two pairs, packages {0}, {1}, {0,1} in that order.
    fn walkthrough() -> ValuationTable {
        ValuationTable::from_values(
            2,
            package_universe(2, None).unwrap(),
            vec![vec![3.0, 1.0, 5.0], vec![2.0, 4.0, 5.0]],
        )
        .unwrap()
    }

    fn fixed(p0: f64, delta: f64, divisor: u32) -> AuctionConfig {
        AuctionConfig {
            initial_prices: InitialPricePolicy::Fixed(p0),
            delta,
            fine_tune_divisor: divisor,
            ..AuctionConfig::default()
        }
    }

    fn single_item(values: &[f64]) -> ValuationTable {
        ValuationTable::from_values(1, vec![pk(&[0])], values.iter().map(|&v| vec![v]).collect())
            .unwrap()
    }

    #[test]
    fn opening_prices_sit_above_singletons() {
        let zero =
            ValuationTable::from_values(2, package_universe(2, None).unwrap(), vec![vec![0.0; 3]])
                .unwrap();
        assert_eq!(
            initial_prices(&zero, InitialPricePolicy::AboveSingletons, 0.5).prices,
            vec![0.5, 0.5]
        );

        let t = ValuationTable::from_values(
            2,
            package_universe(2, None).unwrap(),
            vec![vec![3.0, 1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(
            initial_prices(&t, InitialPricePolicy::AboveSingletons, 1.0).prices,
            vec![4.0, 2.0]
        );
    }

    #[test]
    fn opening_round_is_quiet_even_for_superadditive_packages() {
        // Singletons worthless, the pair together is worth 5.
        let t = ValuationTable::from_values(
            2,
            package_universe(2, None).unwrap(),
            vec![vec![0.0, 0.0, 5.0]],
        )
        .unwrap();
        let p = initial_prices(&t, InitialPricePolicy::AboveSingletons, 0.1);
        assert!(p.package_price(pk(&[0, 1])) > 5.0);
        assert!(demand(0, &p, &t, 0b11).is_empty());
    }

    #[test]
    fn demand_examples() {
        let t = walkthrough();
        let high = PriceVector::new(vec![10.0, 10.0]);
        assert!(demand(0, &high, &t, 0b11).is_empty());

        // U = 0 still bids.
        let single = single_item(&[3.0]);
        let b = demand(0, &PriceVector::new(vec![3.0]), &single, 0b1);
        assert_eq!(b.package, Some((0, pk(&[0]))));
        assert_eq!(b.pay_price, 3.0);

        // U({0}) = 1 = U({0,1}); the larger valuation wins the tie.
        let t = ValuationTable::from_values(
            2,
            package_universe(2, None).unwrap(),
            vec![vec![3.0, 0.0, 5.0]],
        )
        .unwrap();
        let b = demand(0, &PriceVector::new(vec![2.0, 2.0]), &t, 0b11);
        assert_eq!(b.package, Some((2, pk(&[0, 1]))));
        assert_eq!(b.pay_price, 4.0);

        // Sold items are off the menu.
        let b = demand(0, &PriceVector::new(vec![2.0, 2.0]), &t, 0b01);
        assert_eq!(b.package, Some((0, pk(&[0]))));
    }

    #[test]
    fn zero_valuations_are_never_demanded() {
        let t = single_item(&[0.0]);
        assert!(demand(0, &PriceVector::new(vec![0.0]), &t, 1).is_empty());
    }

    #[test]
    fn conflict_detection() {
        let bid = |c, items: &[usize]| Bid {
            bidder: c,
            package: Some((0, pk(items))),
            pay_price: 0.0,
        };
        assert_eq!(detect_conflicts(&[bid(0, &[1]), bid(1, &[2])]), 0);
        assert_eq!(
            detect_conflicts(&[bid(0, &[1, 2]), bid(1, &[2, 3])]),
            1 << 2
        );
        assert_eq!(
            detect_conflicts(&[bid(0, &[1]), bid(1, &[1]), bid(2, &[1])]),
            1 << 1
        );
        assert_eq!(detect_conflicts(&[Bid::empty(0), Bid::empty(1)]), 0);
    }

    #[test]
    fn descend_and_ascend_steps() {
        let mut p = PriceVector::new(vec![5.0, 5.0]);
        assert_eq!(p.descend(0b11, 1.0), 0);
        assert_eq!((p.prices.clone(), p.round), (vec![4.0, 4.0], 1));

        let mut p = PriceVector::new(vec![0.5, 7.0]);
        p.descend(0b01, 1.0);
        assert_eq!(p.prices, vec![0.0, 7.0]);
        assert_eq!(p.descend(0b01, 1.0), 0b01);

        let mut p = PriceVector::new(vec![1.0, 3.0, 2.0]);
        p.ascend(0b010, 0.1);
        assert_eq!(p.prices, vec![1.0, 3.1, 2.0]);
        p.ascend(0b101, 0.1);
        assert_eq!(p.prices, vec![1.1, 3.1, 2.1]);
        assert_eq!(p.round, 0);
    }

    #[test]
    fn fix_winners_freezes_and_retires() {
        let t = walkthrough();
        let mut s = AuctionState::new(2, PriceVector::new(vec![3.0, 3.0]));
        s.fix_winners(&[]).unwrap();
        assert_eq!(s.active_items, 0b11);
        let b0 = Bid {
            bidder: 0,
            package: Some((0, pk(&[0]))),
            pay_price: 3.0,
        };
        let b1 = Bid {
            bidder: 1,
            package: Some((1, pk(&[1]))),
            pay_price: 3.0,
        };
        s.fix_winners(&[b0, b1]).unwrap();
        assert_eq!(s.allocation.0, vec![Some(pk(&[0])), Some(pk(&[1]))]);
        assert_eq!(s.active_items, 0);
        assert_eq!(s.prices.fixed, vec![true, true]);
        assert!(!s.has_active_bidder());
        let _ = t;

        let mut s = AuctionState::new(2, PriceVector::new(vec![3.0, 3.0]));
        let overlap = Bid {
            bidder: 1,
            package: Some((2, pk(&[0, 1]))),
            pay_price: 6.0,
        };
        assert!(s.fix_winners(&[b0, overlap]).is_err());
    }

    #[test]
    fn walkthrough_instance() {
        let t = walkthrough();
        let out = run_auction(&t, &fixed(5.0, 1.0, 10)).unwrap();
        // At (4, 4) bidder 1 already affords pair 1 with zero utility; pair 0
        // keeps descending and bidder 0 takes it at 3.
        assert_eq!(out.allocation.0, vec![Some(pk(&[0])), Some(pk(&[1]))]);
        assert_eq!(out.pay_prices, vec![3.0, 4.0]);
        assert_eq!(out.revenue, 7.0);
        assert_eq!(out.utilities, vec![0.0, 0.0]);
        assert_eq!(overall_gain(&out, &t).unwrap(), 7.0);
        assert_eq!(out.rounds, 2);
    }

    #[test]
    fn single_bidder_sells_at_first_affordable_step() {
        let t = single_item(&[2.4]);
        let out = run_auction(&t, &fixed(5.0, 1.0, 10)).unwrap();
        assert_eq!(out.pay_prices, vec![2.0]);
        assert_eq!(out.rounds, 3);
        assert!(out.rounds <= out.descent_bound(1.0));
        assert!((out.utilities[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn exact_tie_goes_to_lowest_index_at_current_price() {
        let t = single_item(&[4.0, 4.0]);
        let out = run_auction(&t, &fixed(5.0, 1.0, 10)).unwrap();
        assert_eq!(out.allocation.0, vec![Some(pk(&[0])), None]);
        assert_eq!(out.pay_prices[0], 4.0);
        assert_eq!(out.deterministic_awards, 1);
        assert!(out.price_history.iter().all(|e| e.phase != Phase::Ascend));
    }

    #[test]
    fn contested_item_ascends_until_weaker_bidder_leaves() {
        let t = single_item(&[4.0, 3.5]);
        let out = run_auction(&t, &fixed(5.0, 2.0, 10)).unwrap();
        // p: 5 -> 3, both bid; +0.2 steps to 3.6 where bidder 1 drops out.
        assert_eq!(out.allocation.0, vec![Some(pk(&[0])), None]);
        assert!((out.pay_prices[0] - 3.6).abs() < 1e-9);
        let ascents: Vec<_> = out
            .price_history
            .iter()
            .filter(|e| e.phase == Phase::Ascend)
            .collect();
        assert_eq!(ascents.len(), 3);
        assert_eq!(out.max_fine_tune_steps, 3);
        assert_eq!(out.price_history.last().unwrap().phase, Phase::Fixed);
    }

    #[test]
    fn worthless_item_is_retired_and_auction_ends() {
        let t = single_item(&[0.0]);
        let out = run_auction(&t, &fixed(2.0, 1.0, 10)).unwrap();
        assert_eq!(out.unsold, 1);
        assert_eq!(out.allocation, Allocation::empty(1));
        assert_eq!(out.rounds, 3);
        assert!(out.rounds <= out.descent_bound(1.0));
    }

    #[test]
    fn fine_tune_cap_forces_award() {
        let t = single_item(&[9.0, 8.0]);
        let cfg = AuctionConfig {
            max_fine_tune_rounds: 2,
            ..fixed(5.0, 1.0, 100)
        };
        let out = run_auction(&t, &cfg).unwrap();
        assert_eq!(out.max_fine_tune_steps, 2);
        assert_eq!(out.deterministic_awards, 1);
        assert_eq!(out.allocation.0, vec![Some(pk(&[0])), None]);
        assert!((out.pay_prices[0] - 5.02).abs() < 1e-9);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let t = walkthrough();
        assert!(run_auction(
            &t,
            &AuctionConfig {
                delta: 0.0,
                ..AuctionConfig::default()
            }
        )
        .is_err());
        assert!(run_auction(
            &t,
            &AuctionConfig {
                fine_tune_divisor: 0,
                ..AuctionConfig::default()
            }
        )
        .is_err());
    }

    #[test]
    fn round_guard_reports_non_termination() {
        let t = single_item(&[0.0]);
        let cfg = AuctionConfig {
            max_rounds: Some(2),
            ..fixed(100.0, 1.0, 10)
        };
        assert_eq!(run_auction(&t, &cfg), Err(Error::NonTermination(2)));
    }
}
