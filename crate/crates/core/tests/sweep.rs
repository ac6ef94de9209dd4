mod common;

use spectrum_lease::optimizer::{fibonacci_argmax, level_window, solve_sweep_traced};
use spectrum_lease::{brute_force, solve_sweep, EntrantSet, QuadratureConfig, RevenueModel, RevenueView};

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn inner_intervals_have_constant_perceived_entrants() {
    for seed in 500..520u64 {
        let (n, m) = common::random_shape(seed);
        let market = common::random_market(seed, n, m, 300);
        let model = RevenueModel::new(&market, quad()).unwrap();
        let (_, trace) = solve_sweep_traced(&model, None).unwrap();
        let last = market
            .est_params()
            .iter()
            .filter_map(|p| p.max_lease().finite())
            .max()
            .unwrap();
        let mut covered = vec![None; last as usize + 1];
        for (_, jv) in &trace.inner {
            for t in jv.lo..=jv.hi {
                assert!(
                    covered[t as usize].is_none(),
                    "seed {seed}: T={t} in two inner intervals"
                );
                covered[t as usize] = Some(jv.entrants.clone());
            }
        }
        for t in 1..=last {
            let got = model.perceived_entrants(t).unwrap();
            match &covered[t as usize] {
                Some(s) => assert_eq!(&got, s, "seed {seed}: T={t}"),
                None => assert!(got.is_empty(), "seed {seed}: T={t} uncovered but {got} enter"),
            }
        }
    }
}

#[test]
fn outer_intervals_match_largest_sets() {
    for seed in 600..620u64 {
        let (n, m) = common::random_shape(seed);
        let market = common::random_market(seed, n, m, 300);
        let model = RevenueModel::new(&market, quad()).unwrap();
        let (_, trace) = solve_sweep_traced(&model, None).unwrap();
        for iv in &trace.outer {
            for t in [iv.lo, (iv.lo + iv.hi) / 2, iv.hi] {
                assert_eq!(model.largest_entrants(RevenueView::Regulator, t).unwrap(), iv.entrants);
            }
        }
    }
}

#[test]
fn interval_optimum_sits_on_an_endpoint() {
    for seed in 700..715u64 {
        let (n, m) = common::random_shape(seed);
        let market = common::random_market(seed, n, m, 300);
        let model = RevenueModel::new(&market, quad()).unwrap();
        let (_, trace) = solve_sweep_traced(&model, None).unwrap();
        for (_, jv) in &trace.inner {
            let u = |t| model.objective(RevenueView::Regulator, &jv.entrants, t).unwrap().value;
            let ends = u(jv.lo).max(u(jv.hi));
            let inside = (jv.lo..=jv.hi).map(u).fold(f64::MIN, f64::max);
            assert!(
                inside <= ends * (1.0 + 1e-12),
                "seed {seed}: interior max {inside} > endpoints {ends}"
            );
        }
    }
}

#[test]
fn sweep_agrees_with_brute_force_on_larger_caps() {
    for seed in 800..806u64 {
        let market = common::random_market(seed, 5, 2, 1500);
        let model = RevenueModel::new(&market, quad()).unwrap();
        let a = solve_sweep(&model, None).unwrap();
        let b = brute_force(&model, None).unwrap();
        assert_eq!(a.t_star, b.t_star, "seed {seed}");
        assert_eq!(a.entrants_perceived, b.entrants_perceived);
        assert!((a.u_perceived - b.u_perceived).abs() <= 1e-9 * b.u_perceived.max(1e-300));
        assert_eq!(a.u_true, b.u_true);
        assert!(a.eval_count < b.eval_count);
    }
}

#[test]
fn fibonacci_finds_revenue_peak() {
    // A weak operator facing strong rivals has a unimodal revenue in T.
    let mut tested = 0;
    for seed in 900..910u64 {
        let market = common::random_market(seed * 2, 4, 1, 600);
        let model = RevenueModel::new(&market, quad()).unwrap();
        let all = EntrantSet::full(4);
        let weakest = (0..4)
            .min_by(|&a, &b| market.true_params()[a].mu().total_cmp(&market.true_params()[b].mu()))
            .unwrap();
        let f = |t: u64| model.revenue(RevenueView::True, &all, weakest, t).unwrap();
        let scan: Vec<f64> = (1..=600).map(f).collect();
        let is_unimodal = {
            let peak = scan
                .iter()
                .enumerate()
                .fold(0, |b, (i, &v)| if v > scan[b] { i } else { b });
            scan[..=peak].windows(2).all(|w| w[1] >= w[0]) && scan[peak..].windows(2).all(|w| w[1] <= w[0])
        };
        if !is_unimodal {
            continue;
        }
        let best = scan.iter().copied().fold(f64::MIN, f64::max);
        let (t, v) = fibonacci_argmax(1, 600, |t| Ok(f(t))).unwrap();
        assert_eq!(v, best, "seed {seed}: found T={t}");

        let level = 0.5 * best;
        let w = level_window(1, 600, level, |t| Ok(f(t))).unwrap().unwrap();
        let lo = scan.iter().position(|&x| x >= level).unwrap() as u64 + 1;
        let hi = scan.iter().rposition(|&x| x >= level).unwrap() as u64 + 1;
        assert_eq!((w.gamma, w.big_gamma), (lo, hi), "seed {seed}");
        tested += 1;
    }
    assert!(tested >= 3, "only {tested} unimodal instances");
}

#[test]
fn unbounded_estimate_needs_horizon() {
    let cfg =
        spectrum_lease::config::Config::from_toml_str(include_str!("../../../configs/homogeneous8.toml")).unwrap();
    let market = cfg.market().unwrap();
    let model = RevenueModel::new(&market, quad()).unwrap();
    assert!(matches!(
        solve_sweep(&model, None),
        Err(spectrum_lease::LeaseError::UnboundedHorizon)
    ));
    assert!(matches!(
        brute_force(&model, None),
        Err(spectrum_lease::LeaseError::UnboundedHorizon)
    ));
    let res = solve_sweep(&model, Some(1000)).unwrap();
    assert_eq!(res.t_star, 307);
}
