//! Spectrum allocation for device-to-device (D2D) pairs underlaying a
//! downlink cellular network, resolved by a reverse iterative combinatorial
//! auction.
//!
//! Resource units (the spectrum serving one cellular user each) act as
//! bidders; D2D pairs are the items, auctioned in packages under linear
//! anonymous prices that descend each round and are fine-tuned upwards when
//! two bidders contest the same pair.
//!
//! The crate is `no_std` (it needs `alloc`). Every random draw goes through
//! a caller-provided [`rand::Rng`], so a seeded generator makes every
//! operation reproducible.
//!
//! Module map:
//! - [`geometry`]: cell layout and user placement.
//! - [`channel`]: path loss, shadowing, Rayleigh fading and link gains.
//! - [`rate`]: SINR, Shannon rates, packages and the valuation table.
//! - [`auction`]: the descending-price auction engine.
//! - [`baselines`]: exhaustive optimum, random and single-pair baselines.
//! - [`metrics`]: efficiency ratios and the per-drop pipeline.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod auction;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod rate;

pub use error::{Error, Result};
