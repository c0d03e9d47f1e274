//! Single-cell layout: a base station at the origin, cellular users and D2D
//! transmitters spread uniformly over the cell disc, and each D2D receiver
//! dropped uniformly within `max_d2d_distance` of its transmitter.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Bound on receiver re-draws before placement gives up.
pub const MAX_REDRAWS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.distance(Point::ORIGIN)
    }
}

/// Cell geometry and propagation knobs. Distances in meters, gains in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellConfig {
    pub cell_radius: f64,
    pub max_d2d_distance: f64,
    /// Exponent on links that involve the BS or a cellular user.
    pub path_loss_exponent_cellular: f64,
    /// Exponent on device-to-device-receiver links.
    pub path_loss_exponent_d2d: f64,
    pub shadowing_sigma_cellular_db: f64,
    pub shadowing_sigma_d2d_db: f64,
    pub bs_antenna_gain_db: f64,
    pub ue_antenna_gain_db: f64,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            cell_radius: 500.0,
            max_d2d_distance: 5.0,
            path_loss_exponent_cellular: 3.67,
            path_loss_exponent_d2d: 3.0,
            shadowing_sigma_cellular_db: 8.0,
            shadowing_sigma_d2d_db: 4.0,
            bs_antenna_gain_db: 14.0,
            ue_antenna_gain_db: 0.0,
        }
    }
}

impl CellConfig {
    /// Pure distance-power-law propagation: no shadowing, no antenna gain.
    pub fn free_space(cell_radius: f64, max_d2d_distance: f64, exponent: f64) -> Self {
        CellConfig {
            cell_radius,
            max_d2d_distance,
            path_loss_exponent_cellular: exponent,
            path_loss_exponent_d2d: exponent,
            shadowing_sigma_cellular_db: 0.0,
            shadowing_sigma_d2d_db: 0.0,
            bs_antenna_gain_db: 0.0,
            ue_antenna_gain_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.cell_radius > 0.0 && self.cell_radius.is_finite()) {
            return bad("cell_radius must be positive");
        }
        if !(self.max_d2d_distance > 0.0 && self.max_d2d_distance <= self.cell_radius) {
            return bad("max_d2d_distance must lie in (0, cell_radius]");
        }
        if !(self.path_loss_exponent_cellular >= 2.0 && self.path_loss_exponent_d2d >= 2.0) {
            return bad("path loss exponents must be at least 2");
        }
        if !(self.shadowing_sigma_cellular_db >= 0.0 && self.shadowing_sigma_d2d_db >= 0.0) {
            return bad("shadowing sigmas must be non-negative");
        }
        if !(self.bs_antenna_gain_db.is_finite() && self.ue_antenna_gain_db.is_finite()) {
            return bad("antenna gains must be finite");
        }
        Ok(())
    }
}

/// Transmit and noise powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Powers {
    pub bs: f64,
    pub d2d: f64,
    pub noise: f64,
}

impl Powers {
    pub fn validate(&self) -> Result<()> {
        if self.bs > 0.0 && self.d2d > 0.0 && self.noise > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "powers must be positive: {self:?}"
            )))
        }
    }
}

/// One drop: where everybody is, and how loud they transmit.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs_position: Point,
    pub cellular_positions: Vec<Point>,
    pub d2d_tx_positions: Vec<Point>,
    pub d2d_rx_positions: Vec<Point>,
    pub p_bs: f64,
    pub p_d2d: Vec<f64>,
    pub noise_power: f64,
}

impl Scenario {
    pub fn num_cellular(&self) -> usize {
        self.cellular_positions.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.d2d_tx_positions.len()
    }
}

/// Area-uniform point in the disc of `radius` around `center`.
pub fn uniform_in_disc<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Point {
    let r = radius * libm::sqrt(rng.random::<f64>());
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(
        center.x + r * libm::cos(theta),
        center.y + r * libm::sin(theta),
    )
}

/// Drops `num_cellular` cellular users and `num_pairs` D2D pairs into the
/// cell. Receivers that would land outside the cell are re-drawn.
pub fn place_users<R: Rng + ?Sized>(
    config: &CellConfig,
    num_cellular: usize,
    num_pairs: usize,
    powers: &Powers,
    rng: &mut R,
) -> Result<Scenario> {
    config.validate()?;
    powers.validate()?;
    if num_cellular == 0 || num_pairs == 0 {
        return Err(Error::InvalidConfig(
            "at least one cellular user and one D2D pair are required".into(),
        ));
    }

    let cellular_positions = (0..num_cellular)
        .map(|_| uniform_in_disc(Point::ORIGIN, config.cell_radius, rng))
        .collect();

    let mut d2d_tx_positions = Vec::with_capacity(num_pairs);
    let mut d2d_rx_positions = Vec::with_capacity(num_pairs);
    for _ in 0..num_pairs {
        let tx = uniform_in_disc(Point::ORIGIN, config.cell_radius, rng);
        let mut attempts = 0;
        let rx = loop {
            let candidate = uniform_in_disc(tx, config.max_d2d_distance, rng);
            if candidate.norm() <= config.cell_radius {
                break candidate;
            }
            attempts += 1;
            if attempts >= MAX_REDRAWS {
                return Err(Error::Placement {
                    attempts,
                    reason: "D2D receiver keeps falling outside the cell",
                });
            }
        };
        d2d_tx_positions.push(tx);
        d2d_rx_positions.push(rx);
    }

    Ok(Scenario {
        bs_position: Point::ORIGIN,
        cellular_positions,
        d2d_tx_positions,
        d2d_rx_positions,
        p_bs: powers.bs,
        p_d2d: alloc::vec![powers.d2d; num_pairs],
        noise_power: powers.noise,
    })
}
