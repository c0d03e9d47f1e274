//! Experiment configuration: a flat `key = value` TOML file. Every key is
//! optional and falls back to the reference simulation setup (500 m cell,
//! 46/23 dBm, -174 dBm/Hz over 15 kHz with a 9 dB noise figure, 14/0 dBi
//! antennas, 5 m D2D range).

use std::fs;
use std::path::{Path, PathBuf};

use d2d_rica_core::auction::{AuctionConfig, InitialPricePolicy};
use d2d_rica_core::baselines::ExhaustiveLimits;
use d2d_rica_core::channel::{dbm_to_watts, noise_power, Fading};
use d2d_rica_core::geometry::{CellConfig, Powers};
use d2d_rica_core::metrics::DropConfig;
use serde::{Deserialize, Serialize};

use crate::experiment::{SweepSpec, SweepVariable};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{key}` out of range: {reason}")]
    Range { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricePolicyName {
    AboveSingletons,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cell_radius_m: f64,
    pub max_d2d_distance_m: f64,
    pub path_loss_exponent_cellular: f64,
    pub path_loss_exponent_d2d: f64,
    pub shadowing_sigma_cellular_db: f64,
    pub shadowing_sigma_d2d_db: f64,
    pub bs_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    pub rayleigh_fading: bool,

    pub bs_power_dbm: f64,
    pub device_power_dbm: f64,
    pub noise_density_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,

    pub delta: f64,
    pub fine_tune_divisor: u32,
    pub initial_price_policy: PricePolicyName,
    pub fixed_initial_price: f64,
    pub max_fine_tune_rounds: usize,
    /// 0 leaves package size uncapped.
    pub max_package_size: usize,
    pub exhaustive_max_pairs: usize,
    pub exhaustive_max_units: usize,

    pub sweep_variable: SweepVariable,
    pub sweep_from: usize,
    pub sweep_to: usize,
    /// Resource units held fixed while sweeping D2D pairs.
    pub fixed_resource_units: usize,
    /// D2D pairs held fixed while sweeping resource units.
    pub fixed_d2d_pairs: usize,
    pub drops: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub trace: bool,

    /// Linear powers, derived once from the dBm fields.
    #[serde(skip)]
    powers: Option<Powers>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let cell = CellConfig::default();
        let mut cfg = ExperimentConfig {
            cell_radius_m: cell.cell_radius,
            max_d2d_distance_m: cell.max_d2d_distance,
            path_loss_exponent_cellular: cell.path_loss_exponent_cellular,
            path_loss_exponent_d2d: cell.path_loss_exponent_d2d,
            shadowing_sigma_cellular_db: cell.shadowing_sigma_cellular_db,
            shadowing_sigma_d2d_db: cell.shadowing_sigma_d2d_db,
            bs_antenna_gain_dbi: cell.bs_antenna_gain_db,
            ue_antenna_gain_dbi: cell.ue_antenna_gain_db,
            rayleigh_fading: true,
            bs_power_dbm: 46.0,
            device_power_dbm: 23.0,
            noise_density_dbm_per_hz: -174.0,
            bandwidth_hz: 15_000.0,
            noise_figure_db: 9.0,
            delta: 0.1,
            fine_tune_divisor: 10,
            initial_price_policy: PricePolicyName::AboveSingletons,
            fixed_initial_price: 10.0,
            max_fine_tune_rounds: 10_000,
            max_package_size: 0,
            exhaustive_max_pairs: 12,
            exhaustive_max_units: 8,
            sweep_variable: SweepVariable::NumD2dPairs,
            sweep_from: 2,
            sweep_to: 8,
            fixed_resource_units: 8,
            fixed_d2d_pairs: 4,
            drops: 200,
            master_seed: 1,
            output_dir: PathBuf::from("results"),
            trace: false,
            powers: None,
        };
        cfg.powers = Some(cfg.linear_powers());
        cfg
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    ExperimentConfig::from_toml(&text)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        raw.finalize()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all serializable")
    }

    /// Validates every field and converts the dBm powers to watts.
    pub fn finalize(mut self) -> Result<Self, ConfigError> {
        self.validate()?;
        self.powers = Some(self.linear_powers());
        Ok(self)
    }

    fn linear_powers(&self) -> Powers {
        Powers {
            bs: dbm_to_watts(self.bs_power_dbm),
            d2d: dbm_to_watts(self.device_power_dbm),
            noise: noise_power(
                self.noise_density_dbm_per_hz,
                self.bandwidth_hz,
                self.noise_figure_db,
            ),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Range {
                    key,
                    reason: reason.to_owned(),
                })
            }
        }
        let finite = |x: f64| x.is_finite();
        check(
            self.cell_radius_m > 0.0 && finite(self.cell_radius_m),
            "cell_radius_m",
            "must be positive",
        )?;
        check(
            self.max_d2d_distance_m > 0.0 && self.max_d2d_distance_m <= self.cell_radius_m,
            "max_d2d_distance_m",
            "must lie in (0, cell_radius_m]",
        )?;
        check(
            self.path_loss_exponent_cellular >= 2.0,
            "path_loss_exponent_cellular",
            "must be at least 2",
        )?;
        check(
            self.path_loss_exponent_d2d >= 2.0,
            "path_loss_exponent_d2d",
            "must be at least 2",
        )?;
        check(
            self.shadowing_sigma_cellular_db >= 0.0,
            "shadowing_sigma_cellular_db",
            "must be non-negative",
        )?;
        check(
            self.shadowing_sigma_d2d_db >= 0.0,
            "shadowing_sigma_d2d_db",
            "must be non-negative",
        )?;
        check(
            finite(self.bs_antenna_gain_dbi),
            "bs_antenna_gain_dbi",
            "must be finite",
        )?;
        check(
            finite(self.ue_antenna_gain_dbi),
            "ue_antenna_gain_dbi",
            "must be finite",
        )?;
        check(finite(self.bs_power_dbm), "bs_power_dbm", "must be finite")?;
        check(
            finite(self.device_power_dbm),
            "device_power_dbm",
            "must be finite",
        )?;
        check(
            finite(self.noise_density_dbm_per_hz),
            "noise_density_dbm_per_hz",
            "must be finite",
        )?;
        check(
            self.bandwidth_hz > 0.0 && finite(self.bandwidth_hz),
            "bandwidth_hz",
            "must be positive",
        )?;
        check(
            finite(self.noise_figure_db),
            "noise_figure_db",
            "must be finite",
        )?;
        check(
            self.delta > 0.0 && finite(self.delta),
            "delta",
            "must be positive",
        )?;
        check(
            self.fine_tune_divisor >= 1,
            "fine_tune_divisor",
            "must be at least 1",
        )?;
        check(
            self.fixed_initial_price >= 0.0 && finite(self.fixed_initial_price),
            "fixed_initial_price",
            "must be non-negative",
        )?;
        check(
            self.max_fine_tune_rounds >= 1,
            "max_fine_tune_rounds",
            "must be at least 1",
        )?;
        check(
            self.max_package_size <= 64,
            "max_package_size",
            "must be at most 64",
        )?;
        check(self.sweep_from >= 1, "sweep_from", "must be at least 1")?;
        check(
            self.sweep_to >= self.sweep_from,
            "sweep_to",
            "must not be below sweep_from",
        )?;
        check(
            self.fixed_resource_units >= 1,
            "fixed_resource_units",
            "must be at least 1",
        )?;
        check(
            self.fixed_d2d_pairs >= 1,
            "fixed_d2d_pairs",
            "must be at least 1",
        )?;
        check(self.drops >= 1, "drops", "must be at least 1")?;
        Ok(())
    }

    pub fn powers(&self) -> Powers {
        self.powers
            .expect("powers are derived whenever a config is built")
    }

    pub fn cell(&self) -> CellConfig {
        CellConfig {
            cell_radius: self.cell_radius_m,
            max_d2d_distance: self.max_d2d_distance_m,
            path_loss_exponent_cellular: self.path_loss_exponent_cellular,
            path_loss_exponent_d2d: self.path_loss_exponent_d2d,
            shadowing_sigma_cellular_db: self.shadowing_sigma_cellular_db,
            shadowing_sigma_d2d_db: self.shadowing_sigma_d2d_db,
            bs_antenna_gain_db: self.bs_antenna_gain_dbi,
            ue_antenna_gain_db: self.ue_antenna_gain_dbi,
        }
    }

    pub fn auction(&self) -> AuctionConfig {
        AuctionConfig {
            initial_prices: match self.initial_price_policy {
                PricePolicyName::AboveSingletons => InitialPricePolicy::AboveSingletons,
                PricePolicyName::Fixed => InitialPricePolicy::Fixed(self.fixed_initial_price),
            },
            delta: self.delta,
            fine_tune_divisor: self.fine_tune_divisor,
            max_fine_tune_rounds: self.max_fine_tune_rounds,
            max_rounds: None,
        }
    }

    pub fn drop_config(&self) -> DropConfig {
        DropConfig {
            cell: self.cell(),
            powers: self.powers(),
            fading: if self.rayleigh_fading {
                Fading::Rayleigh
            } else {
                Fading::None
            },
            auction: self.auction(),
            max_package_size: (self.max_package_size > 0).then_some(self.max_package_size),
            exhaustive_limits: ExhaustiveLimits {
                max_pairs: self.exhaustive_max_pairs,
                max_bidders: self.exhaustive_max_units,
            },
            keep_trace: self.trace,
        }
    }

    pub fn sweep(&self) -> SweepSpec {
        SweepSpec {
            variable: self.sweep_variable,
            values: (self.sweep_from..=self.sweep_to).collect(),
            fixed_other: match self.sweep_variable {
                SweepVariable::NumD2dPairs => self.fixed_resource_units,
                SweepVariable::NumResourceUnits => self.fixed_d2d_pairs,
            },
            drops: self.drops,
            master_seed: self.master_seed,
        }
    }
}
