use rand::Rng;

use crate::error::Result;
use crate::game::RevenueModel;
use crate::market::{stream_rng, LeaseCap, Market, OperatorParams};
use crate::optimizer::sweep::solve_sweep;
use crate::revenue::QuadratureConfig;

/// Revenue evaluations used by one sweep solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRow {
    pub n: usize,
    pub horizon: u64,
    pub eval_count: u64,
}

/// Complete-information market of `n` operators drawn from the default
/// heterogeneous windows, two channels, with caps spread over
/// `[horizon/2, horizon]` and the last operator's cap pinned to `horizon`.
pub fn probe_market(n: usize, horizon: u64, seed: u64) -> Result<Market> {
    let mut rng = stream_rng(seed, n as u64);
    let mut ops = Vec::with_capacity(n);
    for k in 0..n {
        let cap = if k + 1 == n {
            horizon
        } else {
            ((horizon as f64) * rng.random_range(0.5..1.0)).round().max(1.0) as u64
        };
        ops.push(OperatorParams::from_time_constant(
            rng.random_range(0.8..1.2),
            rng.random_range(0.4..0.6),
            rng.random_range(50.0..150.0),
            rng.random_range(0.7..0.9),
            rng.random_range(50.0..150.0),
            LeaseCap::Finite(cap),
        )?);
    }
    Market::complete_info(2, ops)
}

/// Runs the sweep solver on one probe market per `(n, horizon)` pair.
pub fn eval_counter_probe(
    sizes: &[usize],
    horizons: &[u64],
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for &horizon in horizons {
        for &n in sizes {
            let market = probe_market(n, horizon, seed)?;
            let model = RevenueModel::new(&market, *cfg)?;
            let res = solve_sweep(&model, None)?;
            rows.push(ProbeRow {
                n,
                horizon,
                eval_count: res.eval_count,
            });
        }
    }
    Ok(rows)
}
