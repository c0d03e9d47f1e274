use d2d_rica_core::auction::{run_auction, AuctionConfig, InitialPricePolicy, Phase};
use d2d_rica_core::baselines::solve_cap_exhaustive;
use d2d_rica_core::channel::LinkGains;
use d2d_rica_core::rate::{package_universe, Allocation, Package, RateModel, ValuationTable};
use proptest::prelude::*;

const N0: f64 = 4.743_416_490_252_57e-16;
const P_BS: f64 = 39.81;
const P_D: f64 = 0.1995;

fn gain() -> impl Strategy<Value = f64> {
    (-16.0f64..-2.0).prop_map(|e| 10f64.powf(e))
}

prop_compose! {
    fn link_gains(c: usize, d: usize)(
        bc in proptest::collection::vec(gain(), c),
        bd in proptest::collection::vec(gain(), d),
        dd in proptest::collection::vec(gain(), d),
        dc in proptest::collection::vec(proptest::collection::vec(gain(), c), d),
        mut x in proptest::collection::vec(proptest::collection::vec(gain(), d), d),
    ) -> LinkGains {
        for (e, row) in x.iter_mut().enumerate() {
            row[e] = 0.0;
        }
        LinkGains { g_bs_cell: bc, g_bs_d2drx: bd, g_d2d_self: dd, g_d2d_cell: dc, g_d2d_cross: x }
    }
}

fn sizes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=5)
}

fn model_and_gains() -> impl Strategy<Value = LinkGains> {
    sizes().prop_flat_map(|(c, d)| link_gains(c, d))
}

fn value_table() -> impl Strategy<Value = ValuationTable> {
    (1usize..=4, 1usize..=4)
        .prop_flat_map(|(c, d)| {
            let k = (1usize << d) - 1;
            let cell =
                prop_oneof![2 => Just(0.0), 5 => 0.0f64..10.0, 1 => (0u8..6).prop_map(f64::from)];
            (
                Just(d),
                proptest::collection::vec(proptest::collection::vec(cell, k), c),
            )
        })
        .prop_map(|(d, values)| {
            ValuationTable::from_values(d, package_universe(d, None).unwrap(), values).unwrap()
        })
}

fn allocation_for(num_bidders: usize, num_pairs: usize, owners: &[usize]) -> Allocation {
    let mut masks = vec![0u64; num_bidders];
    for (d, owner) in owners.iter().enumerate().take(num_pairs) {
        let o = owner % (num_bidders + 1);
        if o < num_bidders {
            masks[o] |= 1 << d;
        }
    }
    Allocation(masks.into_iter().map(Package::from_mask).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rates_and_values_are_non_negative(g in model_and_gains()) {
        let pd = vec![P_D; g.num_pairs()];
        let m = RateModel { gains: &g, p_bs: P_BS, p_d2d: &pd, noise: N0 };
        for pkg in package_universe(g.num_pairs(), None).unwrap() {
            for c in 0..g.num_cellular() {
                prop_assert!(m.cellular_package_rate(c, pkg) >= 0.0);
                prop_assert!(m.valuation(c, pkg) >= 0.0);
                for d in pkg.members() {
                    prop_assert!(m.d2d_rate_in_package(d, pkg).unwrap() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn growing_a_package_never_helps_its_members(g in model_and_gains()) {
        let pd = vec![P_D; g.num_pairs()];
        let m = RateModel { gains: &g, p_bs: P_BS, p_d2d: &pd, noise: N0 };
        let all = package_universe(g.num_pairs(), None).unwrap();
        for &small in &all {
            for extra in 0..g.num_pairs() {
                if small.contains(extra) {
                    continue;
                }
                let big = Package::from_mask(small.mask() | 1 << extra).unwrap();
                for c in 0..g.num_cellular() {
                    prop_assert!(m.cellular_package_rate(c, big) <= m.cellular_package_rate(c, small));
                    prop_assert!(m.cellular_package_rate(c, small) <= m.standalone_rate(c));
                }
                for d in small.members() {
                    prop_assert!(m.d2d_rate_in_package(d, big).unwrap() <= m.d2d_rate_in_package(d, small).unwrap());
                }
            }
        }
    }

    #[test]
    fn sum_rate_is_baseline_plus_rate_deltas(
        g in model_and_gains(),
        owners in proptest::collection::vec(0usize..16, 5),
    ) {
        let pd = vec![P_D; g.num_pairs()];
        let m = RateModel { gains: &g, p_bs: P_BS, p_d2d: &pd, noise: N0 };
        let table = ValuationTable::build(&m, package_universe(g.num_pairs(), None).unwrap()).unwrap();
        let x = allocation_for(g.num_cellular(), g.num_pairs(), &owners);
        let direct = m.system_sum_rate(&x).unwrap();
        let base: f64 = (0..g.num_cellular()).map(|c| m.standalone_rate(c)).sum();
        let deltas: f64 = x.iter().enumerate().filter_map(|(c, k)| k.map(|k| {
            m.package_channel_rate(c, k) - m.standalone_rate(c)
        })).sum();
        let tol = 1e-9 * direct.abs().max(1.0);
        prop_assert!((direct - (base + deltas)).abs() <= tol);
        prop_assert!((direct - table.sum_rate(&x).unwrap()).abs() <= tol);
        prop_assert!((m.system_sum_rate(&Allocation::empty(g.num_cellular())).unwrap() - base).abs() <= tol);
    }

    #[test]
    fn auction_outcome_is_feasible_rational_and_balanced(
        table in value_table(),
        fixed in any::<bool>(),
        delta in prop_oneof![Just(0.1), Just(0.5), Just(1.0)],
    ) {
        let cfg = AuctionConfig {
            initial_prices: if fixed { InitialPricePolicy::Fixed(12.0) } else { InitialPricePolicy::AboveSingletons },
            delta,
            ..AuctionConfig::default()
        };
        let out = run_auction(&table, &cfg).unwrap();
        out.allocation.check_feasible(table.num_pairs).unwrap();
        for &u in &out.utilities {
            prop_assert!(u >= -1e-9);
        }
        let gain = table.overall_gain(&out.allocation).unwrap();
        prop_assert!((gain - out.revenue - out.total_utility()).abs() <= 1e-9 * gain.abs().max(1.0));
        prop_assert!(out.max_fine_tune_steps <= cfg.max_fine_tune_rounds);
        prop_assert!(out.final_prices.prices.iter().all(|&p| p >= 0.0));
        // Winners only hold packages they value.
        for (c, k) in out.package_index.iter().enumerate() {
            if let Some(k) = k {
                prop_assert!(table.values[c][*k] > 0.0);
            }
        }
        // A sold item's price is frozen from its sale on.
        let mut sold = 0u64;
        for e in &out.price_history {
            prop_assert!(sold & (1 << e.item) == 0, "price of sold item {} changed", e.item);
            if e.phase == Phase::Fixed {
                sold |= 1 << e.item;
            }
        }
        prop_assert_eq!(sold, out.allocation.served_mask());
        let best = solve_cap_exhaustive(&table).unwrap();
        prop_assert!(gain <= best.overall_gain + 1e-9 * best.overall_gain.max(1.0));
    }
}

/// Finite-difference check of interference monotonicity: the package
/// value before clamping falls as the pair's interference on the cellular
/// user or the BS interference on the pair's receiver grows, with the
/// slope the closed-form derivative predicts.
#[test]
fn valuation_slopes_match_closed_form() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let ln2 = std::f64::consts::LN_2;
    for _ in 0..10 {
        let mut lg = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
        let (gc, gb, gs, gx) = (
            lg(-12.0, -9.0),
            lg(-14.0, -11.0),
            lg(-5.0, -2.0),
            lg(-14.0, -11.0),
        );
        let (n0, pb, pd) = (N0, P_BS, P_D);
        let rate = |gx: f64, gb: f64| {
            let g = LinkGains {
                g_bs_cell: vec![gc],
                g_bs_d2drx: vec![gb],
                g_d2d_self: vec![gs],
                g_d2d_cell: vec![vec![gx]],
                g_d2d_cross: vec![vec![0.0]],
            };
            let m = RateModel {
                gains: &g,
                p_bs: pb,
                p_d2d: &[pd],
                noise: n0,
            };
            m.package_channel_rate(0, Package::singleton(0))
        };

        // d/dg of log2(1 + S/(P g + N)) = -S P / ((P g + N)(P g + N + S) ln 2)
        let s_c = pb * gc;
        let want_c = -s_c * pd / ((pd * gx + n0) * (pd * gx + n0 + s_c) * ln2);
        let s_d = pd * gs;
        let want_d = -s_d * pb / ((pb * gb + n0) * (pb * gb + n0 + s_d) * ln2);

        let h = gx * 1e-4;
        let fd_c = (rate(gx + h, gb) - rate(gx - h, gb)) / (2.0 * h);
        let h = gb * 1e-4;
        let fd_d = (rate(gx, gb + h) - rate(gx, gb - h)) / (2.0 * h);

        assert!(fd_c < 0.0 && fd_d < 0.0);
        assert!(rate(gx * 1.5, gb) < rate(gx, gb));
        assert!(rate(gx, gb * 1.5) < rate(gx, gb));
        assert!(
            (fd_c - want_c).abs() <= 1e-4 * want_c.abs(),
            "{fd_c} vs {want_c}"
        );
        assert!(
            (fd_d - want_d).abs() <= 1e-4 * want_d.abs(),
            "{fd_d} vs {want_d}"
        );
    }
}
