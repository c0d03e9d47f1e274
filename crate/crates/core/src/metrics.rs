//! Efficiency measures and the per-drop pipeline: place users, draw the
//! channel, value every package, then run all four allocation schemes on
//! the same table.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::auction::{approx_eq, AuctionConfig, PriceEvent, IDENTITY_TOLERANCE};
use crate::baselines::{
    random_allocation, run_reduced_rica, run_rica, solve_cap_exhaustive_with, Algorithm,
    AllocationResult, ExhaustiveLimits,
};
use crate::channel::{build_link_gains, Fading};
use crate::error::{Error, Result};
use crate::geometry::{place_users, CellConfig, Powers};
use crate::rate::{package_universe, Allocation, RateModel, ValuationTable};

/// Overall gain of an allocation relative to the optimum. Both zero counts
/// as fully efficient.
pub fn allocating_efficiency(outcome_gain: f64, optimal_gain: f64) -> Result<f64> {
    if outcome_gain < 0.0 || optimal_gain < 0.0 {
        return Err(Error::Invariant(format!(
            "negative overall gain ({outcome_gain}, {optimal_gain})"
        )));
    }
    if outcome_gain > optimal_gain && !approx_eq(outcome_gain, optimal_gain, IDENTITY_TOLERANCE) {
        return Err(Error::Invariant(format!(
            "allocation gain {outcome_gain} exceeds the optimum {optimal_gain}"
        )));
    }
    if optimal_gain == 0.0 {
        return Ok(1.0);
    }
    Ok((outcome_gain / optimal_gain).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropConfig {
    pub cell: CellConfig,
    pub powers: Powers,
    pub fading: Fading,
    pub auction: AuctionConfig,
    pub max_package_size: Option<usize>,
    pub exhaustive_limits: ExhaustiveLimits,
    /// Keep the full-auction price history in the result.
    pub keep_trace: bool,
}

impl Default for DropConfig {
    fn default() -> Self {
        DropConfig {
            cell: CellConfig::default(),
            powers: Powers {
                bs: crate::channel::dbm_to_watts(46.0),
                d2d: crate::channel::dbm_to_watts(23.0),
                noise: crate::channel::noise_power(-174.0, 15_000.0, 9.0),
            },
            fading: Fading::Rayleigh,
            auction: AuctionConfig::default(),
            max_package_size: None,
            exhaustive_limits: ExhaustiveLimits::default(),
            keep_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmMetrics {
    pub algorithm: Algorithm,
    pub allocation: Allocation,
    /// Downlink sum rate, bits/s/Hz.
    pub sum_rate: f64,
    /// Sum of clamped valuations of the allocated packages.
    pub overall_gain: f64,
    /// Sum rate over the optimal sum rate.
    pub eta: f64,
    /// Overall gain over the optimal overall gain.
    pub efficiency: f64,
    /// Descending rounds, for the auctions.
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub seed: u64,
    pub num_cellular: usize,
    pub num_pairs: usize,
    /// Sum rate with no pair served.
    pub baseline_sum_rate: f64,
    /// One entry per algorithm, in [`Algorithm::ALL`] order.
    pub algorithms: Vec<AlgorithmMetrics>,
    pub rica_trace: Option<Vec<PriceEvent>>,
    /// Broken invariants, empty on a healthy drop.
    pub violations: Vec<String>,
}

impl DropResult {
    pub fn metrics(&self, algorithm: Algorithm) -> &AlgorithmMetrics {
        self.algorithms
            .iter()
            .find(|m| m.algorithm == algorithm)
            .expect("every algorithm runs on every drop")
    }
}

/// Runs one fully seeded drop.
pub fn run_drop(
    num_cellular: usize,
    num_pairs: usize,
    config: &DropConfig,
    seed: u64,
) -> Result<DropResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenario = place_users(
        &config.cell,
        num_cellular,
        num_pairs,
        &config.powers,
        &mut rng,
    )?;
    let gains = build_link_gains(&scenario, &config.cell, config.fading, &mut rng);
    let model = RateModel::new(&scenario, &gains);
    let table = ValuationTable::build(
        &model,
        package_universe(num_pairs, config.max_package_size)?,
    )?;

    let mut violations = Vec::new();

    let optimum = solve_cap_exhaustive_with(&table, config.exhaustive_limits)?;
    let (rica, rica_outcome) = run_rica(&table, &config.auction)?;
    let (reduced, reduced_outcome) = run_reduced_rica(&table, &config.auction)?;
    let mut random_rng = ChaCha8Rng::seed_from_u64(seed);
    random_rng.set_stream(1);
    let random = random_allocation(&table, &mut random_rng)?;

    for outcome in [&rica_outcome, &reduced_outcome] {
        let bound = outcome.descent_bound(config.auction.delta);
        if outcome.rounds > bound {
            violations.push(format!(
                "auction took {} descending rounds, bound {bound}",
                outcome.rounds
            ));
        }
        if outcome.max_fine_tune_steps > config.auction.max_fine_tune_rounds {
            violations.push(format!(
                "{} fine-tune steps in one round",
                outcome.max_fine_tune_steps
            ));
        }
        if outcome.utilities.iter().any(|&u| u < -IDENTITY_TOLERANCE) {
            violations.push("a winner ended with negative utility".into());
        }
    }

    let baseline_sum_rate = model.system_sum_rate(&Allocation::empty(num_cellular))?;
    let results: [(&AllocationResult, Option<usize>); 4] = [
        (&optimum, None),
        (&rica, Some(rica_outcome.rounds)),
        (&reduced, Some(reduced_outcome.rounds)),
        (&random, None),
    ];

    let optimal_sum_rate = model.system_sum_rate(&optimum.allocation)?;
    let mut algorithms = Vec::with_capacity(4);
    for (result, rounds) in results {
        let name = result.algorithm;
        if let Err(e) = result.allocation.check_feasible(num_pairs) {
            violations.push(format!("{name}: {e}"));
        }
        let sum_rate = model.system_sum_rate(&result.allocation)?;
        let via_table = table.sum_rate(&result.allocation)?;
        if !approx_eq(sum_rate, via_table, IDENTITY_TOLERANCE) {
            violations.push(format!(
                "{name}: direct sum rate {sum_rate} differs from table sum rate {via_table}"
            ));
        }
        let efficiency = match allocating_efficiency(result.overall_gain, optimum.overall_gain) {
            Ok(e) => e,
            Err(e) => {
                violations.push(format!("{name}: {e}"));
                f64::NAN
            }
        };
        let eta = sum_rate / optimal_sum_rate;
        if sum_rate > optimal_sum_rate && !approx_eq(sum_rate, optimal_sum_rate, IDENTITY_TOLERANCE)
        {
            violations.push(format!(
                "{name}: sum rate {sum_rate} beats the optimum {optimal_sum_rate}"
            ));
        }
        algorithms.push(AlgorithmMetrics {
            algorithm: name,
            allocation: result.allocation.clone(),
            sum_rate,
            overall_gain: result.overall_gain,
            eta,
            efficiency,
            rounds,
        });
    }

    let rica_rate = algorithms[1].sum_rate;
    if rica_rate < baseline_sum_rate && !approx_eq(rica_rate, baseline_sum_rate, IDENTITY_TOLERANCE)
    {
        violations.push(format!(
            "rica sum rate {rica_rate} below the no-D2D baseline {baseline_sum_rate}"
        ));
    }

    Ok(DropResult {
        seed,
        num_cellular,
        num_pairs,
        baseline_sum_rate,
        algorithms,
        rica_trace: config
            .keep_trace
            .then(|| rica_outcome.price_history.clone()),
        violations,
    })
}
