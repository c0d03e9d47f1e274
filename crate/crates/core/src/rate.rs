//! SINR and Shannon rates for a resource unit shared by its cellular user
//! and a package of D2D pairs, and the valuation table the auction runs on.
//!
//! All rates are spectral efficiencies in bits/s/Hz.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::LinkGains;
use crate::error::{Error, Result};
use crate::geometry::Scenario;

/// Above this many packages the universe must be capped.
pub const MAX_PACKAGES: usize = 1 << 20;

pub fn sinr(signal_power: f64, interference_power: f64, noise_power: f64) -> f64 {
    signal_power / (interference_power + noise_power)
}

pub fn shannon_rate(sinr_value: f64) -> f64 {
    libm::log2(1.0 + sinr_value)
}

/// A non-empty set of D2D pair indices, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Package(u64);

impl Package {
    pub fn from_mask(mask: u64) -> Option<Package> {
        (mask != 0).then_some(Package(mask))
    }

    pub fn singleton(pair: usize) -> Package {
        assert!(pair < 64, "pair index {pair} out of range");
        Package(1 << pair)
    }

    pub fn from_pairs(pairs: &[usize]) -> Option<Package> {
        Package::from_mask(pairs.iter().fold(0, |m, &d| m | (1u64 << d)))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, pair: usize) -> bool {
        pair < 64 && self.0 & (1 << pair) != 0
    }

    pub fn intersects(self, other: Package) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of_mask(self, mask: u64) -> bool {
        self.0 & !mask == 0
    }

    /// Member pair indices in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let d = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(d)
        })
    }
}

impl fmt::Debug for Package {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

/// Enumerates every non-empty subset of `0..num_pairs` with at most
/// `max_size` members, ordered by bitmask.
pub fn package_universe(num_pairs: usize, max_size: Option<usize>) -> Result<Vec<Package>> {
    if num_pairs == 0 || num_pairs > 64 {
        return Err(Error::InvalidConfig(format!(
            "number of D2D pairs must be in 1..=64, got {num_pairs}"
        )));
    }
    let cap = max_size.unwrap_or(num_pairs).min(num_pairs);
    if cap == 0 {
        return Err(Error::InvalidConfig(
            "max package size must be at least 1".into(),
        ));
    }
    let mut count: usize = 0;
    let mut binom: usize = 1;
    for s in 1..=cap {
        binom = binom * (num_pairs - s + 1) / s;
        count = count.saturating_add(binom);
        if count > MAX_PACKAGES {
            return Err(Error::TooLarge(format!(
                "{num_pairs} pairs with package size <= {cap} exceed {MAX_PACKAGES} packages; lower the cap"
            )));
        }
    }

    let mut out = Vec::with_capacity(count);
    // Gosper's hack walks each size class in increasing mask order.
    for size in 1..=cap {
        let mut m: u64 = (1u64 << size) - 1;
        let limit_bit = num_pairs as u32;
        loop {
            if 64 - m.leading_zeros() > limit_bit {
                break;
            }
            out.push(Package(m));
            let low = m & m.wrapping_neg();
            let ripple = m.wrapping_add(low);
            if ripple == 0 {
                break;
            }
            m = (((ripple ^ m) >> 2) / low) | ripple;
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Rates of one drop, bound to its gains and powers.
#[derive(Debug, Clone, Copy)]
pub struct RateModel<'a> {
    pub gains: &'a LinkGains,
    pub p_bs: f64,
    pub p_d2d: &'a [f64],
    pub noise: f64,
}

impl<'a> RateModel<'a> {
    pub fn new(scenario: &'a Scenario, gains: &'a LinkGains) -> Self {
        RateModel {
            gains,
            p_bs: scenario.p_bs,
            p_d2d: &scenario.p_d2d,
            noise: scenario.noise_power,
        }
    }

    pub fn num_cellular(&self) -> usize {
        self.gains.num_cellular()
    }

    pub fn num_pairs(&self) -> usize {
        self.gains.num_pairs()
    }

    /// Rate of cellular user `c` with no co-channel interference.
    pub fn standalone_rate(&self, c: usize) -> f64 {
        shannon_rate(sinr(self.p_bs * self.gains.g_bs_cell[c], 0.0, self.noise))
    }

    /// Rate of cellular user `c` while the pairs of `package` reuse its
    /// resources.
    pub fn cellular_package_rate(&self, c: usize, package: Package) -> f64 {
        let interference: f64 = package
            .members()
            .map(|d| self.p_d2d[d] * self.gains.g_d2d_cell[d][c])
            .sum();
        shannon_rate(sinr(
            self.p_bs * self.gains.g_bs_cell[c],
            interference,
            self.noise,
        ))
    }

    /// Rate of pair `d` inside `package`: the BS and the other members
    /// interfere.
    pub fn d2d_rate_in_package(&self, d: usize, package: Package) -> Result<f64> {
        if !package.contains(d) {
            return Err(Error::NotAMember {
                pair: d,
                package: package.mask(),
            });
        }
        Ok(self.d2d_rate_unchecked(d, package))
    }

    fn d2d_rate_unchecked(&self, d: usize, package: Package) -> f64 {
        let g = self.gains;
        let intra: f64 = package
            .members()
            .filter(|&e| e != d)
            .map(|e| self.p_d2d[e] * g.g_d2d_cross[e][d])
            .sum();
        let interference = self.p_bs * g.g_bs_d2drx[d] + intra;
        shannon_rate(sinr(
            self.p_d2d[d] * g.g_d2d_self[d],
            interference,
            self.noise,
        ))
    }

    /// Total rate of resource unit `c` when shared with `package`.
    pub fn package_channel_rate(&self, c: usize, package: Package) -> f64 {
        self.cellular_package_rate(c, package)
            + package
                .members()
                .map(|d| self.d2d_rate_unchecked(d, package))
                .sum::<f64>()
    }

    /// Rate gain of hosting `package` on unit `c`, clamped at zero.
    pub fn valuation(&self, c: usize, package: Package) -> f64 {
        (self.package_channel_rate(c, package) - self.standalone_rate(c)).max(0.0)
    }

    /// Downlink sum rate of all cellular users and all served pairs.
    pub fn system_sum_rate(&self, allocation: &Allocation) -> Result<f64> {
        allocation.check_feasible(self.num_pairs())?;
        if allocation.num_bidders() != self.num_cellular() {
            return Err(Error::Infeasible(format!(
                "allocation covers {} resource units, drop has {}",
                allocation.num_bidders(),
                self.num_cellular()
            )));
        }
        Ok(allocation
            .iter()
            .enumerate()
            .map(|(c, pkg)| match pkg {
                None => self.standalone_rate(c),
                Some(k) => {
                    self.cellular_package_rate(c, k)
                        + k.members()
                            .map(|d| self.d2d_rate_unchecked(d, k))
                            .sum::<f64>()
                }
            })
            .sum())
    }
}

/// The package assigned to each resource unit, if any.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation(pub Vec<Option<Package>>);

impl Allocation {
    pub fn empty(num_bidders: usize) -> Self {
        Allocation(alloc::vec![None; num_bidders])
    }

    pub fn num_bidders(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, c: usize) -> Option<Package> {
        self.0[c]
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<Package>> + '_ {
        self.0.iter().copied()
    }

    pub fn served_mask(&self) -> u64 {
        self.iter().flatten().fold(0, |m, p| m | p.mask())
    }

    /// Packages pairwise disjoint and within `0..num_pairs`.
    pub fn check_feasible(&self, num_pairs: usize) -> Result<()> {
        let mut seen = 0u64;
        for (c, pkg) in self.iter().enumerate() {
            let Some(p) = pkg else { continue };
            if p.members().any(|d| d >= num_pairs) {
                return Err(Error::Infeasible(format!(
                    "unit {c} holds unknown pair in {p:?}"
                )));
            }
            if p.mask() & seen != 0 {
                return Err(Error::Infeasible(format!(
                    "unit {c} package {p:?} overlaps another unit"
                )));
            }
            seen |= p.mask();
        }
        Ok(())
    }
}

/// Valuations `values[c][k]` of every resource unit for every package,
/// together with the unclamped rates they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationTable {
    pub num_pairs: usize,
    pub packages: Vec<Package>,
    pub values: Vec<Vec<f64>>,
    pub standalone: Vec<f64>,
    pub package_rate: Vec<Vec<f64>>,
}

impl ValuationTable {
    pub fn build(model: &RateModel<'_>, packages: Vec<Package>) -> Result<Self> {
        if packages.is_empty() {
            return Err(Error::InvalidConfig("package set is empty".into()));
        }
        check_sorted_unique(&packages)?;
        let num_pairs = model.num_pairs();
        if let Some(p) = packages
            .iter()
            .find(|p| p.members().any(|d| d >= num_pairs))
        {
            return Err(Error::InvalidConfig(format!(
                "package {p:?} names a pair beyond {num_pairs}"
            )));
        }
        let standalone: Vec<f64> = (0..model.num_cellular())
            .map(|c| model.standalone_rate(c))
            .collect();
        let package_rate: Vec<Vec<f64>> = (0..model.num_cellular())
            .map(|c| {
                packages
                    .iter()
                    .map(|&k| model.package_channel_rate(c, k))
                    .collect()
            })
            .collect();
        let values = package_rate
            .iter()
            .zip(&standalone)
            .map(|(row, &v_c)| row.iter().map(|&r| (r - v_c).max(0.0)).collect())
            .collect();
        Ok(ValuationTable {
            num_pairs,
            packages,
            values,
            standalone,
            package_rate,
        })
    }

    /// A table given directly by its valuations; rates are taken equal to
    /// the valuations with zero standalone rate.
    pub fn from_values(
        num_pairs: usize,
        packages: Vec<Package>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_sorted_unique(&packages)?;
        if values.iter().any(|row| row.len() != packages.len()) {
            return Err(Error::InvalidConfig(
                "valuation rows must match the package count".into(),
            ));
        }
        if values
            .iter()
            .flatten()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidConfig(
                "valuations must be finite and non-negative".into(),
            ));
        }
        if packages.iter().any(|p| p.members().any(|d| d >= num_pairs)) {
            return Err(Error::InvalidConfig("package names an unknown pair".into()));
        }
        let standalone = alloc::vec![0.0; values.len()];
        Ok(ValuationTable {
            num_pairs,
            packages,
            package_rate: values.clone(),
            values,
            standalone,
        })
    }

    pub fn num_bidders(&self) -> usize {
        self.values.len()
    }

    pub fn num_packages(&self) -> usize {
        self.packages.len()
    }

    pub fn index_of(&self, package: Package) -> Option<usize> {
        self.packages.binary_search(&package).ok()
    }

    pub fn value(&self, c: usize, k: usize) -> f64 {
        self.values[c][k]
    }

    /// Clamped valuation of `package` for `c`; `None` if the package lies
    /// outside this table's universe.
    pub fn value_of(&self, c: usize, package: Package) -> Option<f64> {
        self.index_of(package).map(|k| self.values[c][k])
    }

    /// Unclamped rate change `V_c(k) - V_c`.
    pub fn rate_delta(&self, c: usize, k: usize) -> f64 {
        self.package_rate[c][k] - self.standalone[c]
    }

    /// Sum of allocated valuations.
    pub fn overall_gain(&self, allocation: &Allocation) -> Result<f64> {
        let mut total = 0.0;
        for (c, pkg) in allocation.iter().enumerate() {
            if let Some(p) = pkg {
                total += self.value_of(c, p).ok_or_else(|| {
                    Error::Infeasible(format!("package {p:?} is outside the valuation table"))
                })?;
            }
        }
        Ok(total)
    }

    /// Sum rate of `allocation` from the stored rates: standalone rates of
    /// idle units plus channel rates of shared ones.
    pub fn sum_rate(&self, allocation: &Allocation) -> Result<f64> {
        allocation.check_feasible(self.num_pairs)?;
        let mut total = 0.0;
        for (c, pkg) in allocation.iter().enumerate() {
            total += match pkg {
                None => self.standalone[c],
                Some(p) => {
                    let k = self.index_of(p).ok_or_else(|| {
                        Error::Infeasible(format!("package {p:?} is outside the valuation table"))
                    })?;
                    self.package_rate[c][k]
                }
            };
        }
        Ok(total)
    }

    /// The sub-table over packages accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(Package) -> bool) -> Result<Self> {
        let idx: Vec<usize> = (0..self.packages.len())
            .filter(|&k| keep(self.packages[k]))
            .collect();
        if idx.is_empty() {
            return Err(Error::InvalidConfig(
                "restriction leaves no packages".into(),
            ));
        }
        let pick = |rows: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|row| idx.iter().map(|&k| row[k]).collect())
                .collect()
        };
        Ok(ValuationTable {
            num_pairs: self.num_pairs,
            packages: idx.iter().map(|&k| self.packages[k]).collect(),
            values: pick(&self.values),
            standalone: self.standalone.clone(),
            package_rate: pick(&self.package_rate),
        })
    }

    /// Only single-pair packages: at most one pair per resource unit.
    pub fn singletons(&self) -> Result<Self> {
        self.restrict(|p| p.len() == 1)
    }
}

fn check_sorted_unique(packages: &[Package]) -> Result<()> {
    if packages.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(
            "packages must be distinct and sorted by mask".into(),
        ))
    }
}
