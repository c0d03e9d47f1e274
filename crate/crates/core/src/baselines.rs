//! Reference allocations the auction is benchmarked against.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::auction::{overall_gain, run_auction, AuctionConfig, AuctionOutcome};
use crate::error::{Error, Result};
use crate::rate::{Allocation, Package, ValuationTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Exhaustive,
    Rica,
    ReducedRica,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Exhaustive,
        Algorithm::Rica,
        Algorithm::ReducedRica,
        Algorithm::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Rica => "rica",
            Algorithm::ReducedRica => "reduced_rica",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub algorithm: Algorithm,
    pub allocation: Allocation,
    /// Sum of the clamped valuations of the allocated packages.
    pub overall_gain: f64,
}

/// Size guard for the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveLimits {
    pub max_pairs: usize,
    pub max_bidders: usize,
}

impl Default for ExhaustiveLimits {
    fn default() -> Self {
        ExhaustiveLimits {
            max_pairs: 12,
            max_bidders: 8,
        }
    }
}

pub fn solve_cap_exhaustive(table: &ValuationTable) -> Result<AllocationResult> {
    solve_cap_exhaustive_with(table, ExhaustiveLimits::default())
}

/// Globally optimal allocation: each bidder gets at most one package from
/// the table, no pair is sold twice, pairs may stay unserved.
///
/// Searches every split of the pair set among the bidders with a subset
/// recursion: `best_c(S) = max over T ⊆ S of best_{c-1}(S \ T) + v_c(T)`.
/// Packages valued at zero are never assigned, and among equal optima the
/// first one met wins, which favours leaving pairs unserved.
pub fn solve_cap_exhaustive_with(
    table: &ValuationTable,
    limits: ExhaustiveLimits,
) -> Result<AllocationResult> {
    let pairs = table.num_pairs;
    let bidders = table.num_bidders();
    if pairs > limits.max_pairs || bidders > limits.max_bidders || pairs > 24 {
        return Err(Error::TooLarge(format!(
            "exhaustive search over {bidders} units and {pairs} pairs exceeds the guard \
             ({} units, {} pairs)",
            limits.max_bidders, limits.max_pairs
        )));
    }
    let full: usize = (1 << pairs) - 1;

    let mut best_prev = vec![0.0_f64; full + 1];
    let mut best_cur = vec![0.0_f64; full + 1];
    let mut choice: Vec<Vec<u32>> = Vec::with_capacity(bidders);
    let mut dense = vec![0.0_f64; full + 1];

    for c in 0..bidders {
        dense.iter_mut().for_each(|v| *v = 0.0);
        for (k, pkg) in table.packages.iter().enumerate() {
            dense[pkg.mask() as usize] = table.values[c][k];
        }
        let mut pick = vec![0u32; full + 1];
        for s in 0..=full {
            let mut best = best_prev[s];
            let mut arg = 0usize;
            let mut t = s;
            while t != 0 {
                let v = dense[t];
                if v > 0.0 {
                    let cand = best_prev[s ^ t] + v;
                    if cand > best {
                        best = cand;
                        arg = t;
                    }
                }
                t = (t - 1) & s;
            }
            best_cur[s] = best;
            pick[s] = arg as u32;
        }
        choice.push(pick);
        core::mem::swap(&mut best_prev, &mut best_cur);
    }

    let mut allocation = Allocation::empty(bidders);
    let mut remaining = full;
    for c in (0..bidders).rev() {
        let t = choice[c][remaining] as usize;
        allocation.0[c] = Package::from_mask(t as u64);
        remaining ^= t;
    }
    let overall_gain = table.overall_gain(&allocation)?;
    Ok(AllocationResult {
        algorithm: Algorithm::Exhaustive,
        allocation,
        overall_gain,
    })
}

/// Every pair picks a resource unit uniformly at random. If the table caps
/// package size, pairs only pick among units with room left and stay
/// unserved when none has.
pub fn random_allocation<R: Rng + ?Sized>(
    table: &ValuationTable,
    rng: &mut R,
) -> Result<AllocationResult> {
    let bidders = table.num_bidders();
    let cap = table.packages.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut masks = vec![0u64; bidders];
    for d in 0..table.num_pairs {
        let open: Vec<usize> = (0..bidders)
            .filter(|&c| (masks[c].count_ones() as usize) < cap)
            .collect();
        if open.is_empty() {
            continue;
        }
        let c = open[rng.random_range(0..open.len())];
        masks[c] |= 1 << d;
    }
    let allocation = Allocation(masks.into_iter().map(Package::from_mask).collect());
    let overall_gain = table.overall_gain(&allocation)?;
    Ok(AllocationResult {
        algorithm: Algorithm::Random,
        allocation,
        overall_gain,
    })
}

/// The full auction over every package in the table.
pub fn run_rica(
    table: &ValuationTable,
    config: &AuctionConfig,
) -> Result<(AllocationResult, AuctionOutcome)> {
    let outcome = run_auction(table, config)?;
    let gain = overall_gain(&outcome, table)?;
    let result = AllocationResult {
        algorithm: Algorithm::Rica,
        allocation: outcome.allocation.clone(),
        overall_gain: gain,
    };
    Ok((result, outcome))
}

/// The auction restricted to single-pair packages, so each resource unit
/// hosts at most one pair.
pub fn run_reduced_rica(
    table: &ValuationTable,
    config: &AuctionConfig,
) -> Result<(AllocationResult, AuctionOutcome)> {
    let singles = table.singletons()?;
    let outcome = run_auction(&singles, config)?;
    let gain = overall_gain(&outcome, &singles)?;
    let result = AllocationResult {
        algorithm: Algorithm::ReducedRica,
        allocation: outcome.allocation.clone(),
        overall_gain: gain,
    };
    Ok((result, outcome))
}
