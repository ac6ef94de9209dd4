use crate::error::{LeaseError, Result};
use crate::game::{RevenueModel, RevenueView};
use crate::optimizer::search::level_window;
use crate::optimizer::{SolveResult, TIE_REL};
use crate::revenue::EntrantSet;

/// Baseline that only considers durations at which every operator enters.
///
/// Each operator's window `R_k(S_N, T) >= λ_k` is searched over
/// `[1, min(Λ_k, horizon)]` with true parameters; the best endpoint of the
/// common window wins, or the result is zero when the windows do not meet.
pub fn solve_subop(model: &RevenueModel<'_>, horizon: Option<u64>) -> Result<SolveResult> {
    let start = model.eval_count();
    let market = model.market();
    let view = RevenueView::True;
    let all = EntrantSet::full(market.len());
    let mut lo_common = 1u64;
    let mut hi_common = u64::MAX;
    let mut feasible = true;
    for (k, p) in market.true_params().iter().enumerate() {
        let cap = p.max_lease().capped(horizon).ok_or(LeaseError::UnboundedHorizon)?;
        match level_window(1, cap, p.mer(), |t| model.revenue(view, &all, k, t))? {
            Some(w) => {
                lo_common = lo_common.max(w.gamma);
                hi_common = hi_common.min(w.big_gamma);
            }
            None => feasible = false,
        }
    }
    let mut best: Option<(u64, f64)> = None;
    if feasible && lo_common <= hi_common {
        let ends: &[u64] = if lo_common == hi_common {
            &[lo_common]
        } else {
            &[lo_common, hi_common]
        };
        for &t in ends {
            let u = model.objective(view, &all, t)?.value;
            if best.is_none_or(|(_, b)| u > b * (1.0 + TIE_REL)) {
                best = Some((t, u));
            }
        }
    }
    let (t_star, u, entrants) = match best {
        Some((t, u)) if u > 0.0 => (t, u, all),
        _ => (1, 0.0, EntrantSet::empty()),
    };
    Ok(SolveResult {
        t_star,
        u_perceived: u,
        u_true: u,
        entrants_perceived: entrants.clone(),
        entrants_true: entrants,
        eval_count: model.eval_count() - start,
        intervals_examined: 1,
    })
}
