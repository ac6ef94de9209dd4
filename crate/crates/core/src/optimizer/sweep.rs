//! Two-level interval sweep over lease durations.
//!
//! The outer sweep splits `[1, max Λ̂]` into intervals where the largest
//! perceived candidate set is constant. Inside each, every candidate's
//! satisfaction window is found by Fibonacci search plus two bisections, and
//! a second sweep over those windows yields intervals with a constant
//! perceived entrant set. Only interval endpoints are evaluated as optima.

use crate::error::Result;
use crate::game::{RevenueModel, RevenueView};
use crate::optimizer::search::level_window;
use crate::optimizer::{estimated_caps, sweep_events, EventKind, EventPair, Interval, SolveResult, TIE_REL};
use crate::revenue::EntrantSet;

/// Satisfaction window of one candidate inside one outer interval.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerWindow {
    pub outer: usize,
    pub k: usize,
    pub t_max: u64,
    /// `None` when the candidate's revenue never reaches its MER here.
    pub window: Option<(u64, u64)>,
}

/// Everything the sweep looked at, for inspection and testing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTrace {
    pub outer: Vec<Interval>,
    pub windows: Vec<InnerWindow>,
    /// Inner intervals, each tagged with its outer interval.
    pub inner: Vec<(usize, Interval)>,
    /// Every evaluated `(T, Ũ)` candidate in visiting order.
    pub candidates: Vec<(u64, f64)>,
}

/// Outer events for the regulator's view of the market.
pub(crate) fn outer_events(model: &RevenueModel<'_>, horizon: Option<u64>) -> Result<(Vec<EventPair>, u64)> {
    let market = model.market();
    let caps = estimated_caps(market, horizon)?;
    let mut events = Vec::new();
    for (k, p) in market.est_params().iter().enumerate() {
        let entry = p.entry_slot();
        if entry > caps[k] {
            continue;
        }
        events.push(EventPair {
            t: entry,
            kind: EventKind::Entry,
            k,
        });
        events.push(EventPair {
            t: caps[k] + 1,
            kind: EventKind::Exit,
            k,
        });
    }
    events.sort();
    let last = caps.iter().copied().max().unwrap_or(1);
    Ok((events, last))
}

/// Maximizes the perceived objective over integer lease durations.
///
/// `horizon` replaces every unbounded estimated cap; it is required when any
/// is unbounded.
pub fn solve_sweep(model: &RevenueModel<'_>, horizon: Option<u64>) -> Result<SolveResult> {
    run(model, horizon, None)
}

/// [`solve_sweep`] that also records every interval and candidate.
pub fn solve_sweep_traced(model: &RevenueModel<'_>, horizon: Option<u64>) -> Result<(SolveResult, SweepTrace)> {
    let mut trace = SweepTrace::default();
    let res = run(model, horizon, Some(&mut trace))?;
    Ok((res, trace))
}

fn run(model: &RevenueModel<'_>, horizon: Option<u64>, mut trace: Option<&mut SweepTrace>) -> Result<SolveResult> {
    let start = model.eval_count();
    let market = model.market();
    let view = RevenueView::Regulator;
    let (events, last) = outer_events(model, horizon)?;
    let outer = sweep_events(&events, last);
    let mut intervals_examined = outer.len() as u64;
    let mut best: Option<(u64, f64, EntrantSet)> = None;

    for (oi, iv) in outer.iter().enumerate() {
        let mut inner_events = Vec::new();
        for k in iv.entrants.iter() {
            let mer = market.est_params()[k].mer();
            let w = level_window(iv.lo, iv.hi, mer, |t| model.revenue(view, &iv.entrants, k, t))?;
            if let Some(tr) = trace.as_deref_mut() {
                tr.windows.push(InnerWindow {
                    outer: oi,
                    k,
                    t_max: w.map_or(0, |w| w.t_max),
                    window: w.map(|w| (w.gamma, w.big_gamma)),
                });
            }
            if let Some(w) = w {
                inner_events.push(EventPair {
                    t: w.gamma,
                    kind: EventKind::Entry,
                    k,
                });
                if w.big_gamma < iv.hi {
                    inner_events.push(EventPair {
                        t: w.big_gamma + 1,
                        kind: EventKind::Exit,
                        k,
                    });
                }
            }
        }
        inner_events.sort();
        let inner = sweep_events(&inner_events, iv.hi);
        intervals_examined += inner.len() as u64;
        for jv in inner {
            let ends: &[u64] = if jv.lo == jv.hi { &[jv.lo] } else { &[jv.lo, jv.hi] };
            for &t in ends {
                let u = model.objective(view, &jv.entrants, t)?.value;
                if let Some(tr) = trace.as_deref_mut() {
                    tr.candidates.push((t, u));
                }
                if best.as_ref().is_none_or(|(_, b, _)| u > b * (1.0 + TIE_REL)) {
                    best = Some((t, u, jv.entrants.clone()));
                }
            }
            if let Some(tr) = trace.as_deref_mut() {
                tr.inner.push((oi, jv));
            }
        }
    }
    if let Some(tr) = trace {
        tr.outer = outer;
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
        intervals_examined,
    })
}
