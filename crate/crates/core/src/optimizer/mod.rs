//! Lease-duration optimizers.

mod brute;
mod homogeneous;
mod probe;
mod search;
mod subop;
mod sweep;

pub use brute::brute_force;
pub use homogeneous::solve_homogeneous;
pub use probe::{eval_counter_probe, probe_market, ProbeRow};
pub use search::{fibonacci_argmax, level_window, LevelWindow};
pub use subop::solve_subop;
pub use sweep::{solve_sweep, solve_sweep_traced, InnerWindow, SweepTrace};

use crate::error::{LeaseError, Result};
use crate::market::Market;
use crate::revenue::EntrantSet;

/// Relative margin a later candidate must beat the incumbent by; equal
/// values keep the shorter lease.
pub const TIE_REL: f64 = 1e-12;

/// One sweep event: operator `k` enters or leaves at lease duration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventPair {
    pub t: u64,
    pub kind: EventKind,
    pub k: usize,
}

/// Exits sort before entries at the same duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Exit,
    Entry,
}

/// Inclusive range of lease durations on which `entrants` is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
    pub entrants: EntrantSet,
}

/// Output of every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Optimal lease duration chosen by the regulator.
    pub t_star: u64,
    /// Objective value the regulator expects at `t_star`.
    pub u_perceived: f64,
    /// Objective value actually realized at `t_star`.
    pub u_true: f64,
    pub entrants_perceived: EntrantSet,
    pub entrants_true: EntrantSet,
    pub eval_count: u64,
    pub intervals_examined: u64,
}

/// Sweeps `events` (already sorted) batch by batch and returns the non-empty
/// sets alive between consecutive event durations. The last set runs to
/// `last_hi` when it is still non-empty.
pub(crate) fn sweep_events(events: &[EventPair], last_hi: u64) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let t = events[i].t;
        while i < events.len() && events[i].t == t {
            let e = events[i];
            match e.kind {
                EventKind::Entry => {
                    if let Err(pos) = current.binary_search(&e.k) {
                        current.insert(pos, e.k);
                    }
                }
                EventKind::Exit => current.retain(|&j| j != e.k),
            }
            i += 1;
        }
        let hi = if i < events.len() { events[i].t - 1 } else { last_hi };
        if !current.is_empty() && t <= hi {
            out.push(Interval {
                lo: t,
                hi,
                entrants: EntrantSet::from_sorted(current.clone()),
            });
        }
    }
    out
}

/// Regulator-side affordability caps with unbounded entries replaced by
/// `horizon`.
pub(crate) fn estimated_caps(market: &Market, horizon: Option<u64>) -> Result<Vec<u64>> {
    market
        .est_params()
        .iter()
        .map(|p| p.max_lease().capped(horizon).ok_or(LeaseError::UnboundedHorizon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, kind: EventKind, k: usize) -> EventPair {
        EventPair { t, kind, k }
    }

    #[test]
    fn batches_share_a_duration() {
        let mut events = vec![
            ev(5, EventKind::Entry, 0),
            ev(5, EventKind::Entry, 1),
            ev(9, EventKind::Exit, 0),
            ev(9, EventKind::Entry, 2),
            ev(12, EventKind::Exit, 1),
            ev(12, EventKind::Exit, 2),
        ];
        events.sort();
        let got = sweep_events(&events, 20);
        let want = [(5, 8, vec![0, 1]), (9, 11, vec![1, 2])];
        assert_eq!(got.len(), want.len());
        for (iv, (lo, hi, s)) in got.iter().zip(want) {
            assert_eq!((iv.lo, iv.hi, iv.entrants.indices()), (lo, hi, s.as_slice()));
        }
    }

    #[test]
    fn exits_sort_before_entries() {
        let mut events = [ev(3, EventKind::Entry, 0), ev(3, EventKind::Exit, 1)];
        events.sort();
        assert_eq!(events[0].kind, EventKind::Exit);
    }

    #[test]
    fn open_tail_runs_to_last() {
        let got = sweep_events(&[ev(4, EventKind::Entry, 2)], 10);
        assert_eq!((got[0].lo, got[0].hi), (4, 10));
    }
}
