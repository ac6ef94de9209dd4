use spectrum_lease::config::Config;
use spectrum_lease::optimizer::solve_sweep_traced;
use spectrum_lease::{EntrantSet, QuadratureConfig, RevenueModel, RevenueView};

fn set(ix: &[usize]) -> EntrantSet {
    EntrantSet::new(ix.iter().copied()).unwrap()
}

fn outer(path_text: &str) -> Vec<(u64, u64, EntrantSet)> {
    let market = Config::from_toml_str(path_text).unwrap().market().unwrap();
    let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
    let (_, trace) = solve_sweep_traced(&model, None).unwrap();
    trace.outer.into_iter().map(|iv| (iv.lo, iv.hi, iv.entrants)).collect()
}

#[test]
fn staggered_market_outer_intervals() {
    // Exit happens after the last affordable slot, so each cap is inclusive.
    let got = outer(include_str!("../../../configs/staggered3.toml"));
    let want = vec![
        (100, 174, set(&[1])),
        (175, 199, set(&[0, 1])),
        (200, 300, set(&[0, 1, 2])),
        (301, 450, set(&[1, 2])),
        (451, 625, set(&[2])),
    ];
    assert_eq!(got, want);
}

#[test]
fn staggered_market_largest_sets() {
    let market = Config::from_toml_str(include_str!("../../../configs/staggered3.toml"))
        .unwrap()
        .market()
        .unwrap();
    let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
    let at = |t| model.largest_entrants(RevenueView::Regulator, t).unwrap();
    assert_eq!(at(250), set(&[0, 1, 2]));
    assert_eq!(at(500), set(&[2]));
    assert_eq!(at(99), set(&[]));
    assert_eq!(at(626), set(&[]));
    assert_eq!(format!("{}", at(250)), "{1,2,3}");
}

#[test]
fn simultaneous_entry_skips_pair() {
    let got = outer(include_str!("../../../configs/simultaneous3.toml"));
    assert!(got.iter().all(|(_, _, s)| *s != set(&[0, 1])));
    assert_eq!(got[0], (100, 199, set(&[1])));
    assert_eq!(got[1], (200, 300, set(&[0, 1, 2])));
}

#[test]
fn lone_operator_earns_its_mean() {
    let market = Config::from_toml_str(include_str!("../../../configs/single_operator.toml"))
        .unwrap()
        .market()
        .unwrap();
    let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
    let (res, _) = solve_sweep_traced(&model, None).unwrap();
    // Alone, revenue is μT, so every T in [100, 400] gives U = μ and the
    // tie rule keeps the shortest.
    assert_eq!(res.t_star, 100);
    assert_eq!(res.u_perceived, 1.0);
    assert_eq!(res.entrants_true, set(&[0]));
}
