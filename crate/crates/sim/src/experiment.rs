//! Monte Carlo sweeps over the number of D2D pairs or resource units.

use std::fmt;
use std::str::FromStr;

use d2d_rica_core::baselines::Algorithm;
use d2d_rica_core::metrics::{run_drop, DropConfig, DropResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NumD2dPairs,
    NumResourceUnits,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::NumD2dPairs => "num_d2d_pairs",
            SweepVariable::NumResourceUnits => "num_resource_units",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "num_d2d_pairs" | "d2d" | "D" => Ok(SweepVariable::NumD2dPairs),
            "num_resource_units" | "units" | "C" => Ok(SweepVariable::NumResourceUnits),
            other => Err(format!(
                "unknown sweep variable `{other}` (num_d2d_pairs or num_resource_units)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<usize>,
    /// Value of the count that is not swept.
    pub fixed_other: usize,
    pub drops: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    /// (resource units, D2D pairs) at a sweep value.
    pub fn counts(&self, value: usize) -> (usize, usize) {
        match self.variable {
            SweepVariable::NumD2dPairs => (self.fixed_other, value),
            SweepVariable::NumResourceUnits => (value, self.fixed_other),
        }
    }
}

/// Parses `var=lo..hi` (inclusive) into a variable and its values.
pub fn parse_sweep_arg(arg: &str) -> Result<(SweepVariable, Vec<usize>), String> {
    let (var, range) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected var=lo..hi, got `{arg}`"))?;
    let variable: SweepVariable = var.trim().parse()?;
    let (lo, hi) = range
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got `{range}`"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("empty or zero-based range {lo}..{hi}"));
    }
    Ok((variable, (lo..=hi).collect()))
}

/// Seed of drop `drop` at sweep point `point`. SplitMix64 over a fixed
/// index layout so every drop has its own well-mixed stream.
pub fn drop_seed(master_seed: u64, point: usize, drop: usize) -> u64 {
    let index = ((point as u64) << 32) | drop as u64;
    let mut z = master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation, 0 for a single sample.
    pub std: f64,
    pub std_err: f64,
}

impl Stat {
    pub fn of(samples: &[f64]) -> Stat {
        let n = samples.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
                std_err: f64::NAN,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat {
            mean,
            std,
            std_err: std / (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub sum_rate: Stat,
    pub eta: Stat,
    pub efficiency: Stat,
    /// Mean descending rounds, for the auctions only.
    pub mean_rounds: Option<f64>,
    pub drops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub variable: SweepVariable,
    pub value: usize,
    pub num_cellular: usize,
    pub num_pairs: usize,
    pub algorithms: Vec<AlgorithmSummary>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<PointSummary>,
    /// Per-drop results, grouped by point and sorted by seed.
    pub drops: Vec<Vec<DropResult>>,
}

impl SweepResult {
    pub fn violation_count(&self) -> usize {
        self.points.iter().map(|p| p.violations.len()).sum()
    }
}

/// Summarizes a set of drops. The drops are sorted by seed first, so the
/// result does not depend on the order they arrive in.
pub fn summarize(variable: SweepVariable, value: usize, drops: &mut [DropResult]) -> PointSummary {
    drops.sort_by_key(|d| d.seed);
    let (num_cellular, num_pairs) = drops
        .first()
        .map(|d| (d.num_cellular, d.num_pairs))
        .unwrap_or((0, 0));
    let algorithms = Algorithm::ALL
        .iter()
        .map(|&alg| {
            let pick = |f: fn(&d2d_rica_core::metrics::AlgorithmMetrics) -> f64| -> Vec<f64> {
                drops.iter().map(|d| f(d.metrics(alg))).collect()
            };
            let rounds: Vec<f64> = drops
                .iter()
                .filter_map(|d| d.metrics(alg).rounds.map(|r| r as f64))
                .collect();
            AlgorithmSummary {
                algorithm: alg,
                sum_rate: Stat::of(&pick(|m| m.sum_rate)),
                eta: Stat::of(&pick(|m| m.eta)),
                efficiency: Stat::of(&pick(|m| m.efficiency)),
                mean_rounds: (!rounds.is_empty()).then(|| Stat::of(&rounds).mean),
                drops: drops.len(),
            }
        })
        .collect();
    let violations = drops
        .iter()
        .flat_map(|d| {
            d.violations
                .iter()
                .map(move |v| format!("seed {}: {v}", d.seed))
        })
        .collect();
    PointSummary {
        variable,
        value,
        num_cellular,
        num_pairs,
        algorithms,
        violations,
    }
}

/// Runs every drop of every sweep point, in parallel across drops.
pub fn monte_carlo(spec: &SweepSpec, config: &DropConfig) -> d2d_rica_core::Result<SweepResult> {
    let mut points = Vec::with_capacity(spec.values.len());
    let mut all_drops = Vec::with_capacity(spec.values.len());
    for (p, &value) in spec.values.iter().enumerate() {
        let (c, d) = spec.counts(value);
        let mut drops = (0..spec.drops)
            .into_par_iter()
            .map(|i| run_drop(c, d, config, drop_seed(spec.master_seed, p, i)))
            .collect::<d2d_rica_core::Result<Vec<_>>>()?;
        points.push(summarize(spec.variable, value, &mut drops));
        all_drops.push(drops);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        points,
        drops: all_drops,
    })
}
