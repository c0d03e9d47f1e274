//! Link power gains: distance power law with a 1 m reference, lognormal
//! shadowing, Rayleigh block fading and fixed antenna gains.
//!
//! A gain `g` here is the linear factor such that received power equals
//! transmit power times `g`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::geometry::{CellConfig, Point, Scenario};

/// Reference distance in meters; shorter links are clamped to it.
pub const REFERENCE_DISTANCE: f64 = 1.0;

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Thermal noise power in watts over `bandwidth_hz` for a receiver with the
/// given noise figure.
pub fn noise_power(density_dbm_per_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    debug_assert!(bandwidth_hz > 0.0);
    dbm_to_watts(density_dbm_per_hz + 10.0 * libm::log10(bandwidth_hz) + noise_figure_db)
}

/// `distance^-exponent * 10^((shadow + antenna)/10) * fading`, with the
/// distance clamped to [`REFERENCE_DISTANCE`].
pub fn path_gain(
    distance: f64,
    exponent: f64,
    shadow_db: f64,
    fading_power: f64,
    antenna_gain_db: f64,
) -> f64 {
    let d = distance.max(REFERENCE_DISTANCE);
    libm::pow(d, -exponent) * db_to_linear(shadow_db + antenna_gain_db) * fading_power
}

/// `|h|^2` for `h ~ CN(0, 1)`: an exponential variate with unit mean.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

pub fn sample_shadowing_db<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    sigma_db * z
}

/// Small-scale fading applied on top of path loss and shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    #[default]
    Rayleigh,
    /// Fading power fixed at 1.
    None,
}

/// Every power gain the rate equations reference.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    /// BS to cellular user `c`.
    pub g_bs_cell: Vec<f64>,
    /// BS to the receiver of pair `d`.
    pub g_bs_d2drx: Vec<f64>,
    /// Transmitter of pair `d` to its own receiver.
    pub g_d2d_self: Vec<f64>,
    /// `g_d2d_cell[d][c]`: transmitter of pair `d` to cellular user `c`.
    pub g_d2d_cell: Vec<Vec<f64>>,
    /// `g_d2d_cross[e][d]`: transmitter of pair `e` to receiver of pair `d`.
    /// The diagonal is unused and left at zero.
    pub g_d2d_cross: Vec<Vec<f64>>,
}

impl LinkGains {
    pub fn num_cellular(&self) -> usize {
        self.g_bs_cell.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.g_d2d_self.len()
    }

    /// All used gains, for invariant checks.
    pub fn iter_used(&self) -> impl Iterator<Item = f64> + '_ {
        let cross = self.g_d2d_cross.iter().enumerate().flat_map(|(e, row)| {
            row.iter()
                .enumerate()
                .filter(move |(d, _)| *d != e)
                .map(|(_, g)| *g)
        });
        self.g_bs_cell
            .iter()
            .chain(&self.g_bs_d2drx)
            .chain(&self.g_d2d_self)
            .chain(self.g_d2d_cell.iter().flatten())
            .copied()
            .chain(cross)
    }
}

struct LinkClass {
    exponent: f64,
    sigma_db: f64,
    antenna_db: f64,
}

impl LinkClass {
    fn draw<R: Rng + ?Sized>(&self, from: Point, to: Point, fading: Fading, rng: &mut R) -> f64 {
        let shadow = sample_shadowing_db(self.sigma_db, rng);
        let fade = match fading {
            Fading::Rayleigh => sample_rayleigh_power(rng),
            Fading::None => 1.0,
        };
        path_gain(
            from.distance(to),
            self.exponent,
            shadow,
            fade,
            self.antenna_db,
        )
    }
}

/// Draws independent shadowing and fading for every link of the drop.
///
/// Links touching the BS or a cellular user use the cellular exponent and
/// sigma; links between D2D devices use the D2D ones. The BS antenna gain
/// applies only on BS links.
pub fn build_link_gains<R: Rng + ?Sized>(
    scenario: &Scenario,
    config: &CellConfig,
    fading: Fading,
    rng: &mut R,
) -> LinkGains {
    let bs_link = LinkClass {
        exponent: config.path_loss_exponent_cellular,
        sigma_db: config.shadowing_sigma_cellular_db,
        antenna_db: config.bs_antenna_gain_db + config.ue_antenna_gain_db,
    };
    let device_to_cellular = LinkClass {
        exponent: config.path_loss_exponent_cellular,
        sigma_db: config.shadowing_sigma_cellular_db,
        antenna_db: 2.0 * config.ue_antenna_gain_db,
    };
    let device_to_device = LinkClass {
        exponent: config.path_loss_exponent_d2d,
        sigma_db: config.shadowing_sigma_d2d_db,
        antenna_db: 2.0 * config.ue_antenna_gain_db,
    };

    let bs = scenario.bs_position;
    let tx = &scenario.d2d_tx_positions;
    let rx = &scenario.d2d_rx_positions;
    let cell = &scenario.cellular_positions;
    let pairs = tx.len();

    let g_bs_cell = cell
        .iter()
        .map(|&u| bs_link.draw(bs, u, fading, rng))
        .collect();
    let g_bs_d2drx = rx
        .iter()
        .map(|&r| bs_link.draw(bs, r, fading, rng))
        .collect();
    let g_d2d_self = tx
        .iter()
        .zip(rx)
        .map(|(&t, &r)| device_to_device.draw(t, r, fading, rng))
        .collect();
    let g_d2d_cell = tx
        .iter()
        .map(|&t| {
            cell.iter()
                .map(|&u| device_to_cellular.draw(t, u, fading, rng))
                .collect()
        })
        .collect();
    let mut g_d2d_cross = vec![vec![0.0; pairs]; pairs];
    for (e, row) in g_d2d_cross.iter_mut().enumerate() {
        for (d, g) in row.iter_mut().enumerate() {
            if d != e {
                *g = device_to_device.draw(tx[e], rx[d], fading, rng);
            }
        }
    }

    LinkGains {
        g_bs_cell,
        g_bs_d2drx,
        g_d2d_self,
        g_d2d_cell,
        g_d2d_cross,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{place_users, Powers};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn path_gain_reference_points() {
        assert_eq!(path_gain(1.0, 4.0, 0.0, 1.0, 0.0), 1.0);
        assert_eq!(path_gain(2.0, 2.0, 0.0, 1.0, 0.0), 0.25);
        // 1e-4 * 10^0.3 * 0.5
        assert!(rel_close(
            path_gain(10.0, 4.0, 0.0, 0.5, 3.0),
            9.976_311_574_844_398e-5,
            1e-9
        ));
    }

    #[test]
    fn path_gain_clamps_below_reference() {
        assert_eq!(path_gain(0.0, 3.0, 0.0, 1.0, 0.0), 1.0);
        assert_eq!(path_gain(0.3, 3.0, 0.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn noise_power_table_values() {
        // -174 + 41.76 + 9 = -123.24 dBm
        assert!(rel_close(
            noise_power(-174.0, 15_000.0, 9.0),
            4.743_416_490_252_57e-16,
            1e-9
        ));
        assert!(rel_close(
            noise_power(-174.0, 1.0, 0.0),
            3.981_071_705_534_986e-21,
            1e-9
        ));
        let ratio = noise_power(-174.0, 15_000.0, 12.0) / noise_power(-174.0, 15_000.0, 9.0);
        assert!(rel_close(ratio, db_to_linear(3.0), 1e-12));
        assert!((ratio - 2.0).abs() < 5e-3);
    }

    #[test]
    fn rayleigh_power_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| sample_rayleigh_power(&mut rng)).collect();
        assert!(samples.iter().all(|&s| s >= 0.0));
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
        let tail = samples.iter().filter(|&&s| s > 1.0).count() as f64 / n as f64;
        assert!((tail - libm::exp(-1.0)).abs() <= 0.01, "tail {tail}");
    }

    fn drop_gains(
        seed: u64,
        c: usize,
        d: usize,
        cfg: &CellConfig,
        fading: Fading,
    ) -> (Scenario, LinkGains) {
        let powers = Powers {
            bs: 40.0,
            d2d: 0.2,
            noise: 4.7e-16,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = place_users(cfg, c, d, &powers, &mut rng).unwrap();
        let g = build_link_gains(&s, cfg, fading, &mut rng);
        (s, g)
    }

    #[test]
    fn link_enumeration_shapes() {
        let (_, g) = drop_gains(1, 2, 3, &CellConfig::default(), Fading::Rayleigh);
        assert_eq!(g.g_bs_cell.len(), 2);
        assert_eq!(g.g_bs_d2drx.len(), 3);
        assert_eq!(g.g_d2d_self.len(), 3);
        assert_eq!(g.g_d2d_cell.len(), 3);
        assert!(g.g_d2d_cell.iter().all(|row| row.len() == 2));
        assert_eq!(g.iter_used().count(), 2 + 3 + 3 + 6 + 6);
        assert!(g.iter_used().all(|x| x > 0.0 && x.is_finite()));
    }

    #[test]
    fn gains_are_deterministic_per_seed() {
        let cfg = CellConfig::default();
        assert_eq!(
            drop_gains(9, 3, 4, &cfg, Fading::Rayleigh),
            drop_gains(9, 3, 4, &cfg, Fading::Rayleigh)
        );
    }

    #[test]
    fn deterministic_channel_matches_formula() {
        let cfg = CellConfig {
            shadowing_sigma_cellular_db: 0.0,
            shadowing_sigma_d2d_db: 0.0,
            ue_antenna_gain_db: 1.5,
            ..CellConfig::default()
        };
        let (s, g) = drop_gains(5, 2, 4, &cfg, Fading::None);
        for d in 0..4 {
            let dist = s.d2d_tx_positions[d]
                .distance(s.d2d_rx_positions[d])
                .max(1.0);
            let expect = libm::pow(dist, -cfg.path_loss_exponent_d2d) * libm::pow(10.0, 3.0 / 10.0);
            assert!(rel_close(g.g_d2d_self[d], expect, 1e-12));
        }
        let dist = s.cellular_positions[1].norm();
        let expect = libm::pow(dist, -3.67) * libm::pow(10.0, 15.5 / 10.0);
        assert!(rel_close(g.g_bs_cell[1], expect, 1e-12));
    }
}
