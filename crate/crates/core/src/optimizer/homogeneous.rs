use crate::error::{invalid, LeaseError, Result};
use crate::market::{epoch_stats_real, OperatorParams};
use crate::optimizer::SolveResult;
use crate::revenue::{BetaTable, EntrantSet};

/// Optimum of a market of `n` identical operators with complete information.
///
/// Entry is all-or-nothing at the smallest integer `T` with
/// `R(n, T) >= λ`, and the objective only falls after it, so that `T` is
/// optimal unless it exceeds the affordability cap.
pub fn solve_homogeneous(params: &OperatorParams, n: usize, beta: &BetaTable) -> Result<SolveResult> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let b = beta
        .beta(n)
        .ok_or(LeaseError::NotHomogeneous("a beta table covering every operator"))?;
    let share = beta.channels().min(n) as f64 / n as f64;
    let scale = params.rho() * b;
    let mut evals = 0u64;
    let mut r = |t: f64| {
        evals += 1;
        let st = epoch_stats_real(params, t);
        share * st.mean + scale * st.std
    };
    let mer = params.mer();

    let mut c: u64 = 1;
    if r(1.0) < mer {
        let mut hi = 2.0;
        while r(hi) < mer {
            hi *= 2.0;
            assert!(hi.is_finite(), "revenue grows without bound in T");
        }
        let mut lo = hi / 2.0;
        while (hi - lo) > 1e-6 * hi {
            let mid = 0.5 * (lo + hi);
            if r(mid) >= mer {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        c = hi.ceil().max(1.0) as u64;
        while c > 1 && r((c - 1) as f64) >= mer {
            c -= 1;
        }
        while r(c as f64) < mer {
            c += 1;
        }
    }

    let feasible = params.max_lease().admits(c);
    let (t_star, u, entrants) = if feasible {
        (c, n as f64 / c as f64 * r(c as f64), EntrantSet::full(n))
    } else {
        (1, 0.0, EntrantSet::empty())
    };
    Ok(SolveResult {
        t_star,
        u_perceived: u,
        u_true: u,
        entrants_perceived: entrants.clone(),
        entrants_true: entrants,
        eval_count: evals,
        intervals_examined: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::LeaseCap;
    use crate::revenue::{compute_beta_table, revenue_homog, QuadratureConfig};

    fn op(mer: f64, cap: LeaseCap) -> OperatorParams {
        OperatorParams::from_time_constant(1.0, 0.5, 100.0, 0.8, mer, cap).unwrap()
    }

    #[test]
    fn optimum_is_first_duration_meeting_mer() {
        let beta = compute_beta_table(12, 2, &QuadratureConfig::default()).unwrap();
        for n in [1, 2, 3, 8, 12] {
            let p = op(100.0, LeaseCap::Unbounded);
            let res = solve_homogeneous(&p, n, &beta).unwrap();
            let t = res.t_star;
            assert!(revenue_homog(&p, n, t, &beta).unwrap() >= 100.0);
            if t > 1 {
                assert!(revenue_homog(&p, n, t - 1, &beta).unwrap() < 100.0);
            }
            let u = n as f64 / t as f64 * revenue_homog(&p, n, t, &beta).unwrap();
            assert_eq!(res.u_perceived.to_bits(), u.to_bits());
        }
    }

    #[test]
    fn unaffordable_optimum_gives_zero() {
        let beta = compute_beta_table(8, 2, &QuadratureConfig::default()).unwrap();
        let res = solve_homogeneous(&op(100.0, LeaseCap::Finite(300)), 8, &beta).unwrap();
        assert_eq!((res.t_star, res.u_perceived), (1, 0.0));
        assert!(res.entrants_perceived.is_empty());
        let res = solve_homogeneous(&op(100.0, LeaseCap::Finite(307)), 8, &beta).unwrap();
        assert_eq!(res.t_star, 307);
    }

    #[test]
    fn zero_mer_enters_at_one() {
        let beta = compute_beta_table(4, 2, &QuadratureConfig::default()).unwrap();
        let res = solve_homogeneous(&op(0.0, LeaseCap::Unbounded), 4, &beta).unwrap();
        assert_eq!(res.t_star, 1);
    }
}
