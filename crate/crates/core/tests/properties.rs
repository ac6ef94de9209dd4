use proptest::prelude::*;
use spectrum_lease::config::{Config, MarketSection, OperatorSpec};
use spectrum_lease::revenue::mc_revenue_oracle;
use spectrum_lease::{
    compute_beta_table, epoch_stats, revenue_hetero, revenue_homog, solve_sweep, EntrantSet, LeaseCap, Market,
    OperatorParams, QuadratureConfig, RevenueModel, RevenueView,
};

fn op(mu: f64, sigma: f64, tau: f64, rho: f64, mer: f64, cap: u64) -> OperatorParams {
    OperatorParams::from_time_constant(mu, sigma, tau, rho, mer, LeaseCap::Finite(cap)).unwrap()
}

prop_compose! {
    fn params()(mu in 0.5..1.5f64, sigma in 0.2..0.8f64, tau in 1.0..300.0f64, rho in 0.0..=1.0f64,
                mer in 10.0..300.0f64, cap in 50u64..400) -> OperatorParams {
        op(mu, sigma, tau, rho, mer, cap)
    }
}

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn epoch_std_strictly_increasing(p in params()) {
        let mut prev = 0.0;
        for t in 1..=10_000u64 {
            let s = epoch_stats(&p, t);
            prop_assert!(s.std > prev, "T={t}: {} <= {prev}", s.std);
            prop_assert_eq!(s.mean, p.mu() * t as f64);
            prev = s.std;
        }
    }

    #[test]
    fn time_constant_is_sugar(mu in 0.5..1.5f64, sigma in 0.2..0.8f64, tau in 0.5..1000.0f64, t in 1u64..5000) {
        let via_tau = OperatorParams::from_time_constant(mu, sigma, tau, 0.8, 100.0, LeaseCap::Unbounded).unwrap();
        let via_a = OperatorParams::new(mu, sigma, (-1.0 / tau).exp(), 0.8, 100.0, LeaseCap::Unbounded).unwrap();
        let (x, y) = (epoch_stats(&via_tau, t), epoch_stats(&via_a, t));
        prop_assert_eq!(x.mean.to_bits(), y.mean.to_bits());
        prop_assert_eq!(x.std.to_bits(), y.std.to_bits());
    }

    #[test]
    fn closed_form_matches_quadrature(p in params(), s in 1usize..8, m in 1usize..4, t in 1u64..1000) {
        let beta = compute_beta_table(s, m, &quad()).unwrap();
        let closed = revenue_homog(&p, s, t, &beta).unwrap();
        let all = EntrantSet::full(s);
        let quadr = revenue_hetero(&vec![p; s], m, &all, 0, t, &quad()).unwrap();
        prop_assert!((closed - quadr).abs() <= 1e-6 * closed.abs().max(1.0), "{closed} vs {quadr}");
    }

    #[test]
    fn revenue_falls_when_a_rival_joins(ps in prop::collection::vec(params(), 2..6), m in 1usize..4, t in 1u64..600) {
        let n = ps.len();
        let without = EntrantSet::full(n - 1);
        let with = EntrantSet::full(n);
        for k in without.iter() {
            let a = revenue_hetero(&ps, m, &without, k, t, &quad()).unwrap();
            let b = revenue_hetero(&ps, m, &with, k, t, &quad()).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-9) + 1e-9, "k={k}: {b} > {a}");
        }
    }

    #[test]
    fn perceived_entrants_are_candidates(ps in prop::collection::vec(params(), 1..6), m in 1usize..4, t in 1u64..400) {
        let market = Market::complete_info(m, ps).unwrap();
        let model = RevenueModel::new(&market, quad()).unwrap();
        let perceived = model.perceived_entrants(t).unwrap();
        let largest = model.largest_entrants(RevenueView::Regulator, t).unwrap();
        prop_assert!(perceived.is_subset(&largest));
        // With complete information everyone agrees with the regulator.
        prop_assert_eq!(&perceived, &model.equilibrium_entrants(t).unwrap());
        let u_hat = model.perceived_at(t).unwrap().value;
        let u = model.true_objective_at(t).unwrap().value;
        prop_assert!((u_hat - u).abs() <= 1e-12 * u.max(1.0));
    }

    #[test]
    fn complete_information_solve_has_no_gap(ps in prop::collection::vec(params(), 1..5), m in 1usize..3) {
        let market = Market::complete_info(m, ps).unwrap();
        let model = RevenueModel::new(&market, quad()).unwrap();
        let res = solve_sweep(&model, None).unwrap();
        prop_assert!((res.u_perceived - res.u_true).abs() <= 1e-12 * res.u_true.max(1.0));
        prop_assert_eq!(&res.entrants_perceived, &res.entrants_true);
        let again = solve_sweep(&RevenueModel::new(&market, quad()).unwrap(), None).unwrap();
        prop_assert_eq!(res, again);
    }

    #[test]
    fn oracle_conserves_channels(ps in prop::collection::vec(params(), 1..6), m in 1usize..4, t in 1u64..200, seed: u64) {
        let all = EntrantSet::full(ps.len());
        let mc = mc_revenue_oracle(&ps, m, &all, t, 5000, seed).unwrap();
        let wins: u64 = mc.wins.iter().sum();
        prop_assert_eq!(wins, (m.min(ps.len()) * 5000) as u64);
        prop_assert_eq!(mc_revenue_oracle(&ps, m, &all, t, 5000, seed).unwrap(), mc);
    }

    #[test]
    fn config_round_trips(
        channels in 1usize..5,
        horizon in proptest::option::of(1u64..10_000),
        ops in prop::collection::vec((0.1..5.0f64, 0.1..2.0f64, 1.0..500.0f64, 0.0..=1.0f64, 0.0..1000.0f64,
                                      proptest::option::of(1u64..10_000), proptest::option::of(1usize..5)), 1..5),
    ) {
        let cfg = Config {
            market: MarketSection { channels, horizon },
            operators: ops
                .into_iter()
                .map(|(mu, sigma, tau, rho, mer, cap, count)| OperatorSpec {
                    count,
                    mu,
                    sigma,
                    a: None,
                    tau: Some(tau),
                    rho,
                    mer,
                    max_lease: cap.map_or(LeaseCap::Unbounded, LeaseCap::Finite).into(),
                    swept: false,
                    estimate: None,
                })
                .collect(),
            experiment: None,
        };
        let text = cfg.to_toml_string();
        let back = Config::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.market().unwrap(), cfg.market().unwrap());
    }
}
