#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectrum_lease::{LeaseCap, Market, OperatorParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw_op(r: &mut ChaCha8Rng, max_cap: u64) -> OperatorParams {
    let cap = r.random_range(20..=max_cap);
    OperatorParams::from_time_constant(
        r.random_range(0.7..1.3),
        r.random_range(0.3..0.7),
        r.random_range(20.0..200.0),
        r.random_range(0.4..1.0),
        r.random_range(10.0..300.0),
        LeaseCap::Finite(cap),
    )
    .unwrap()
}

fn jitter(r: &mut ChaCha8Rng, p: &OperatorParams, frac: f64) -> OperatorParams {
    let mut f = |x: f64| x * (1.0 + frac * r.random_range(-1.0..1.0));
    let cap = p.max_lease().finite().unwrap() as f64;
    OperatorParams::from_time_constant(
        f(p.mu()),
        f(p.sigma()),
        f(p.tau()),
        f(p.rho()).min(1.0),
        f(p.mer()),
        LeaseCap::Finite(f(cap).round().max(1.0) as u64),
    )
    .unwrap()
}

/// Random market with `n` operators, `m` channels and finite caps no larger
/// than `max_cap`. Half of the seeds get perturbed regulator estimates.
pub fn random_market(seed: u64, n: usize, m: usize, max_cap: u64) -> Market {
    let mut r = rng(seed);
    let truth: Vec<OperatorParams> = (0..n).map(|_| draw_op(&mut r, max_cap)).collect();
    if seed.is_multiple_of(2) {
        return Market::complete_info(m, truth).unwrap();
    }
    let est = truth
        .iter()
        .map(|p| {
            let q = jitter(&mut r, p, 0.2);
            let cap = q.max_lease().finite().unwrap().min(max_cap);
            q.with_max_lease(LeaseCap::Finite(cap)).unwrap()
        })
        .collect();
    Market::new(m, truth, est).unwrap()
}

/// Shape drawn from the seed: `N` in `1..=6`, `M` in `1..=3`.
pub fn random_shape(seed: u64) -> (usize, usize) {
    let mut r = rng(seed ^ 0x5eed);
    (r.random_range(1..=6), r.random_range(1..=3))
}

/// Homogeneous operator drawn around the default parameters.
pub fn random_homog(r: &mut ChaCha8Rng) -> OperatorParams {
    OperatorParams::from_time_constant(
        r.random_range(0.5..2.0),
        r.random_range(0.1..1.0),
        r.random_range(5.0..300.0),
        r.random_range(0.1..1.0),
        r.random_range(10.0..300.0),
        LeaseCap::Unbounded,
    )
    .unwrap()
}
