//! Monte-Carlo checks of the analytic epoch statistics and revenues.

use crate::error::Result;
use crate::market::{epoch_stats, sample_bid_revenue, sample_epoch_sums, Market, OperatorParams};
use crate::revenue::{mc_revenue_oracle, revenue_hetero, EntrantSet, QuadratureConfig};

/// Checks fail beyond this many standard errors.
pub const Z_LIMIT: f64 = 4.0;

/// Lease durations every check runs at.
pub const CHECK_DURATIONS: [u64; 3] = [1, 10, 100];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub operator: usize,
    pub t: u64,
    pub analytic: f64,
    pub sampled: f64,
    pub std_err: f64,
    /// True for checks that hold without sampling error.
    pub exact: bool,
    pub pass: bool,
}

impl Check {
    fn statistical(name: &str, operator: usize, t: u64, analytic: f64, sampled: f64, std_err: f64) -> Self {
        let pass = (analytic - sampled).abs() <= Z_LIMIT * std_err;
        Self {
            name: name.into(),
            operator,
            t,
            analytic,
            sampled,
            std_err,
            exact: false,
            pass,
        }
    }

    pub fn z(&self) -> f64 {
        if self.std_err > 0.0 {
            (self.analytic - self.sampled) / self.std_err
        } else if self.analytic == self.sampled {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Compares analytic quantities for the true parameters against sampling.
///
/// `sigma_scale` multiplies `σ` on the analytic side only; values other than
/// 1 are a negative control that must make the report fail.
pub fn validate_market(
    market: &Market,
    cfg: &QuadratureConfig,
    epochs: usize,
    seed: u64,
    sigma_scale: f64,
) -> Result<ValidationReport> {
    let truth = market.true_params();
    let analytic: Vec<OperatorParams> = truth
        .iter()
        .map(|p| OperatorParams::new(p.mu(), p.sigma() * sigma_scale, p.a(), p.rho(), p.mer(), p.max_lease()))
        .collect::<Result<_>>()?;
    let mut report = ValidationReport::default();
    let all = EntrantSet::full(market.len());

    for (k, p) in truth.iter().enumerate() {
        for (i, &t) in CHECK_DURATIONS.iter().enumerate() {
            let stream = seed ^ ((k as u64) << 32) ^ i as u64;
            let sums = sample_epoch_sums(p, t as usize, epochs, stream);
            let n = sums.len() as f64;
            let mean = sums.iter().sum::<f64>() / n;
            let var = sums.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let st = epoch_stats(&analytic[k], t);
            report
                .checks
                .push(Check::statistical("epoch_mean", k, t, st.mean, mean, (var / n).sqrt()));
            report.checks.push(Check::statistical(
                "epoch_std",
                k,
                t,
                st.std,
                var.sqrt(),
                var.sqrt() / (2.0 * (n - 1.0)).sqrt(),
            ));
        }
        if p.rho() == 1.0 {
            let st = epoch_stats(p, CHECK_DURATIONS[1]);
            let pairs = sample_bid_revenue(st, 1.0, epochs.min(10_000), seed ^ k as u64)?;
            let identical = pairs.iter().all(|(y, b)| y.to_bits() == b.to_bits());
            report.checks.push(Check {
                name: "bid_equals_revenue".into(),
                operator: k,
                t: CHECK_DURATIONS[1],
                analytic: 1.0,
                sampled: if identical { 1.0 } else { 0.0 },
                std_err: 0.0,
                exact: true,
                pass: identical,
            });
        }
    }

    for (i, &t) in CHECK_DURATIONS.iter().enumerate() {
        let mc = mc_revenue_oracle(
            truth,
            market.channels(),
            &all,
            t,
            epochs,
            seed.wrapping_add(1000 + i as u64),
        )?;
        for (pos, k) in all.iter().enumerate() {
            let r = revenue_hetero(&analytic, market.channels(), &all, k, t, cfg)?;
            report
                .checks
                .push(Check::statistical("revenue", k, t, r, mc.mean[pos], mc.std_err[pos]));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::LeaseCap;

    fn market(rho: f64) -> Market {
        let p = OperatorParams::from_time_constant(1.0, 0.5, 100.0, rho, 100.0, LeaseCap::Unbounded).unwrap();
        Market::complete_info(2, vec![p; 4]).unwrap()
    }

    #[test]
    fn default_market_validates() {
        let r = validate_market(&market(0.8), &QuadratureConfig::default(), 20_000, 11, 1.0).unwrap();
        assert!(
            r.passed(),
            "{:?}",
            r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
    }

    #[test]
    fn corrupted_sigma_fails() {
        let r = validate_market(&market(0.8), &QuadratureConfig::default(), 20_000, 11, 1.5).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn perfect_correlation_is_flagged_exact() {
        let r = validate_market(&market(1.0), &QuadratureConfig::default(), 5_000, 2, 1.0).unwrap();
        let exact: Vec<_> = r.checks.iter().filter(|c| c.exact).collect();
        assert_eq!(exact.len(), 4);
        assert!(exact.iter().all(|c| c.pass));
    }
}
