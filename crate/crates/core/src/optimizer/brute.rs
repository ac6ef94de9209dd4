use crate::error::Result;
use crate::game::RevenueModel;
use crate::optimizer::{estimated_caps, SolveResult, TIE_REL};
use crate::revenue::EntrantSet;

/// Evaluates the perceived objective at every `T` in `[1, max Λ̂]` and keeps
/// the best, preferring the lower `T` on ties. Unbounded estimated caps need
/// `horizon`.
pub fn brute_force(model: &RevenueModel<'_>, horizon: Option<u64>) -> Result<SolveResult> {
    let start = model.eval_count();
    let last = estimated_caps(model.market(), horizon)?.into_iter().max().unwrap_or(1);
    let mut best: Option<(u64, f64, EntrantSet)> = None;
    for t in 1..=last {
        let o = model.perceived_at(t)?;
        if best.as_ref().is_none_or(|(_, b, _)| o.value > b * (1.0 + TIE_REL)) {
            best = Some((t, o.value, o.entrants));
        }
    }
    let (t_star, u_perceived, entrants_perceived) = match best {
        Some((t, u, s)) if u > 0.0 => (t, u, s),
        _ => (1, 0.0, EntrantSet::empty()),
    };
    let truth = model.true_objective_at(t_star)?;
    Ok(SolveResult {
        t_star,
        u_perceived,
        u_true: truth.value,
        entrants_perceived,
        entrants_true: truth.entrants,
        eval_count: model.eval_count() - start,
        intervals_examined: last,
    })
}
