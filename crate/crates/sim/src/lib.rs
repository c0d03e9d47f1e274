//! Experiment driver for the D2D spectrum auction: configuration files,
//! Monte Carlo sweeps and CSV output. The models and algorithms live in
//! `d2d_rica_core`.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use experiment::{monte_carlo, SweepResult, SweepSpec, SweepVariable};
