//! Entry game played by operators once the lease duration is announced, and
//! the objective the regulator evaluates on its outcome.
//!
//! Three revenue views share one evaluator; they differ only in which
//! parameter vector is read for each operator.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{LeaseError, Result};
use crate::market::{Market, OperatorParams};
use crate::revenue::{compute_beta_table, revenue_hetero, revenue_homog, BetaTable, EntrantSet, QuadratureConfig};

/// Whose knowledge of the market a revenue is computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevenueView {
    /// Every operator's true parameters.
    True,
    /// Operator `k` knows its own true parameters and estimates the rest.
    SelfView(usize),
    /// The regulator's estimates for everyone.
    Regulator,
}

/// Objective value `(1/T) Σ_{k∈S} R_k(S, T)` together with the set used.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub entrants: EntrantSet,
}

/// Revenue evaluator bound to one market. Counts every revenue evaluation.
#[derive(Debug)]
pub struct RevenueModel<'a> {
    market: &'a Market,
    cfg: QuadratureConfig,
    beta: BetaTable,
    evals: AtomicU64,
}

impl<'a> RevenueModel<'a> {
    pub fn new(market: &'a Market, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let beta = compute_beta_table(market.len(), market.channels(), &cfg)?;
        Ok(Self::with_beta(market, cfg, beta))
    }

    /// Reuses a precomputed table; it must cover `market.len()` entrants at
    /// the market's channel count.
    pub fn with_beta(market: &'a Market, cfg: QuadratureConfig, beta: BetaTable) -> Self {
        assert!(beta.n_max() >= market.len() && beta.channels() == market.channels());
        Self {
            market,
            cfg,
            beta,
            evals: AtomicU64::new(0),
        }
    }

    pub fn market(&self) -> &'a Market {
        self.market
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn beta(&self) -> &BetaTable {
        &self.beta
    }

    /// Revenue evaluations made so far.
    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_eval_count(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    /// Parameters of operator `j` under `view`.
    pub fn params(&self, view: RevenueView, j: usize) -> &'a OperatorParams {
        match view {
            RevenueView::True => &self.market.true_params()[j],
            RevenueView::Regulator => &self.market.est_params()[j],
            RevenueView::SelfView(k) if k == j => &self.market.true_params()[j],
            RevenueView::SelfView(_) => &self.market.est_params()[j],
        }
    }

    fn check_view(&self, view: RevenueView) -> Result<()> {
        if let RevenueView::SelfView(k) = view {
            if k >= self.market.len() {
                return Err(LeaseError::IndexOutOfRange {
                    index: k,
                    len: self.market.len(),
                });
            }
        }
        Ok(())
    }

    /// `R_k(S, T)` under `view`. Sets whose members share one revenue process
    /// use the closed form; anything else goes through quadrature.
    pub fn revenue(&self, view: RevenueView, set: &EntrantSet, k: usize, t: u64) -> Result<f64> {
        self.check_view(view)?;
        self.evals.fetch_add(1, Ordering::Relaxed);
        let pk = self.params(view, k);
        if set.contains(k) && set.iter().all(|j| self.params(view, j).same_process(pk)) {
            return revenue_homog(pk, set.len(), t, &self.beta);
        }
        let resolved: Vec<OperatorParams> = (0..self.market.len()).map(|j| *self.params(view, j)).collect();
        revenue_hetero(&resolved, self.market.channels(), set, k, t, &self.cfg)
    }

    /// Operators interested in entering at `T` by affordability and the
    /// mean-revenue threshold alone.
    pub fn largest_entrants(&self, view: RevenueView, t: u64) -> Result<EntrantSet> {
        self.check_view(view)?;
        Ok(EntrantSet::from_sorted(
            (0..self.market.len())
                .filter(|&j| {
                    let p = self.params(view, j);
                    p.max_lease().admits(t) && t >= p.entry_slot()
                })
                .collect(),
        ))
    }

    /// Max-Min equilibrium: `k` enters iff its revenue against its own
    /// largest candidate set meets its true MER.
    pub fn equilibrium_entrants(&self, t: u64) -> Result<EntrantSet> {
        let mut members = Vec::new();
        for k in 0..self.market.len() {
            let p = &self.market.true_params()[k];
            if !p.max_lease().admits(t) {
                continue;
            }
            let view = RevenueView::SelfView(k);
            let candidates = self.largest_entrants(view, t)?;
            if !candidates.contains(k) {
                continue;
            }
            if self.revenue(view, &candidates, k, t)? >= p.mer() {
                members.push(k);
            }
        }
        Ok(EntrantSet::from_sorted(members))
    }

    /// Entrant set as the regulator predicts it from the estimates.
    pub fn perceived_entrants(&self, t: u64) -> Result<EntrantSet> {
        Ok(self.perceived_at(t)?.entrants)
    }

    /// Perceived entrants and the perceived objective at `T`, sharing the
    /// revenue evaluations when every candidate enters.
    pub fn perceived_at(&self, t: u64) -> Result<ObjectiveValue> {
        let view = RevenueView::Regulator;
        let candidates = self.largest_entrants(view, t)?;
        let mut members = Vec::new();
        let mut revenues = Vec::new();
        for k in candidates.iter() {
            let r = self.revenue(view, &candidates, k, t)?;
            if r >= self.market.est_params()[k].mer() {
                members.push(k);
                revenues.push(r);
            }
        }
        let entrants = EntrantSet::from_sorted(members);
        if entrants.len() == candidates.len() {
            let value = if entrants.is_empty() {
                0.0
            } else {
                revenues.iter().sum::<f64>() / t as f64
            };
            return Ok(ObjectiveValue { value, entrants });
        }
        self.objective(view, &entrants, t)
    }

    /// `(1/T) Σ_{k∈S} R_k(S, T)` under `view`; zero for the empty set.
    pub fn objective(&self, view: RevenueView, set: &EntrantSet, t: u64) -> Result<ObjectiveValue> {
        let mut total = 0.0;
        for k in set.iter() {
            total += self.revenue(view, set, k, t)?;
        }
        Ok(ObjectiveValue {
            value: if set.is_empty() { 0.0 } else { total / t as f64 },
            entrants: set.clone(),
        })
    }

    /// `U(T)`: the true objective on the equilibrium entrant set.
    pub fn true_objective_at(&self, t: u64) -> Result<ObjectiveValue> {
        let set = self.equilibrium_entrants(t)?;
        self.objective(RevenueView::True, &set, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::LeaseCap;

    fn example_market() -> Market {
        let ops = [(175.0, 300), (100.0, 450), (200.0, 625)]
            .iter()
            .map(|&(mer, cap)| OperatorParams::new(1.0, 0.5, 0.9, 0.8, mer, LeaseCap::Finite(cap)).unwrap())
            .collect();
        Market::complete_info(2, ops).unwrap()
    }

    #[test]
    fn largest_entrants_follow_thresholds() {
        let market = example_market();
        let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
        let v = RevenueView::Regulator;
        assert!(model.largest_entrants(v, 99).unwrap().is_empty());
        assert_eq!(model.largest_entrants(v, 250).unwrap().indices(), &[0, 1, 2]);
        assert_eq!(model.largest_entrants(v, 500).unwrap().indices(), &[2]);
        assert_eq!(model.largest_entrants(v, 175).unwrap().indices(), &[0, 1]);
        assert!(model.largest_entrants(v, 626).unwrap().is_empty());
    }

    #[test]
    fn empty_set_objective_is_zero() {
        let market = example_market();
        let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
        let o = model.objective(RevenueView::True, &EntrantSet::empty(), 10).unwrap();
        assert_eq!(o.value, 0.0);
        assert_eq!(model.eval_count(), 0);
    }

    #[test]
    fn self_view_out_of_range_is_rejected() {
        let market = example_market();
        let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
        assert!(model.largest_entrants(RevenueView::SelfView(3), 10).is_err());
    }

    #[test]
    fn evaluations_are_counted() {
        let market = example_market();
        let model = RevenueModel::new(&market, QuadratureConfig::default()).unwrap();
        model.objective(RevenueView::True, &EntrantSet::full(3), 250).unwrap();
        assert_eq!(model.eval_count(), 3);
        model.reset_eval_count();
        assert_eq!(model.eval_count(), 0);
    }
}
