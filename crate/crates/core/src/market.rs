//! Operator and market parameters, the AR(1) revenue process and the
//! per-epoch aggregate statistics every revenue integral is built from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LeaseError, Result};

/// Identity of the random stream used by every sampling API. Written into
/// CSV metadata so sampled rows can be re-derived.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/rand_chacha-0.9 + StandardNormal(ziggurat)/rand_distr-0.5";

/// Deterministic generator for `(seed, stream)`. Operator `k` uses stream `k`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maximum affordable lease duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaseCap {
    Finite(u64),
    Unbounded,
}

impl LeaseCap {
    pub fn admits(self, t: u64) -> bool {
        match self {
            LeaseCap::Finite(cap) => t <= cap,
            LeaseCap::Unbounded => true,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            LeaseCap::Finite(cap) => Some(cap),
            LeaseCap::Unbounded => None,
        }
    }

    /// Replaces `Unbounded` with `horizon`, if one is given.
    pub fn capped(self, horizon: Option<u64>) -> Option<u64> {
        match self {
            LeaseCap::Finite(cap) => Some(cap),
            LeaseCap::Unbounded => horizon,
        }
    }
}

/// Process, bidding and entry parameters of one operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    mu: f64,
    sigma: f64,
    a: f64,
    rho: f64,
    mer: f64,
    max_lease: LeaseCap,
}

impl OperatorParams {
    pub fn new(mu: f64, sigma: f64, a: f64, rho: f64, mer: f64, max_lease: LeaseCap) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid("mu", format!("must be finite and > 0, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        if !(0.0..1.0).contains(&a) {
            return Err(invalid("a", format!("must lie in [0, 1), got {a}")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid("rho", format!("must lie in [0, 1], got {rho}")));
        }
        if !(mer.is_finite() && mer >= 0.0) {
            return Err(invalid("mer", format!("must be finite and >= 0, got {mer}")));
        }
        if max_lease == LeaseCap::Finite(0) {
            return Err(invalid("max_lease", "must be >= 1 when finite"));
        }
        Ok(Self {
            mu,
            sigma,
            a,
            rho,
            mer,
            max_lease,
        })
    }

    /// Same as [`OperatorParams::new`] with the autocorrelation given as a
    /// time constant, `a = exp(-1/tau)`.
    pub fn from_time_constant(mu: f64, sigma: f64, tau: f64, rho: f64, mer: f64, max_lease: LeaseCap) -> Result<Self> {
        Self::new(mu, sigma, autocorrelation_from_tau(tau)?, rho, mer, max_lease)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn mer(&self) -> f64 {
        self.mer
    }
    pub fn max_lease(&self) -> LeaseCap {
        self.max_lease
    }

    /// Time constant equivalent of `a` (0 for an uncorrelated process).
    pub fn tau(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            -1.0 / self.a.ln()
        }
    }

    pub fn with_mer(self, mer: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.a, self.rho, mer, self.max_lease)
    }

    pub fn with_max_lease(self, max_lease: LeaseCap) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.a, self.rho, self.mer, max_lease)
    }

    /// True when the revenue process and bid model coincide bit-for-bit;
    /// entry parameters are ignored.
    pub fn same_process(&self, other: &Self) -> bool {
        self.mu.to_bits() == other.mu.to_bits()
            && self.sigma.to_bits() == other.sigma.to_bits()
            && self.a.to_bits() == other.a.to_bits()
            && self.rho.to_bits() == other.rho.to_bits()
    }

    /// Smallest integer lease duration with `mu * T >= mer`, at least 1.
    ///
    /// The float quotient is corrected by one slot when it lands within a
    /// couple of ulps above an integer, so the boundary slot is included.
    pub fn entry_slot(&self) -> u64 {
        entry_slot(self.mer, self.mu)
    }
}

pub(crate) fn entry_slot(mer: f64, mu: f64) -> u64 {
    if mer <= 0.0 {
        return 1;
    }
    let q = mer / mu;
    let mut n = q.ceil();
    if n > 1.0 && (q - (n - 1.0)) <= 4.0 * f64::EPSILON * q {
        n -= 1.0;
    }
    if n < 1.0 {
        1
    } else if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n as u64
    }
}

pub fn autocorrelation_from_tau(tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid("tau", format!("must be finite and > 0, got {tau}")));
    }
    Ok((-1.0 / tau).exp())
}

/// `N` operators with true and estimated parameters competing for `M`
/// identical channels, at most one channel per operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Market {
    channels: usize,
    true_params: Vec<OperatorParams>,
    est_params: Vec<OperatorParams>,
}

impl Market {
    pub fn new(channels: usize, true_params: Vec<OperatorParams>, est_params: Vec<OperatorParams>) -> Result<Self> {
        if channels == 0 {
            return Err(invalid("channels", "must be >= 1"));
        }
        if true_params.is_empty() || true_params.len() != est_params.len() {
            return Err(LeaseError::MarketShape {
                true_len: true_params.len(),
                est_len: est_params.len(),
            });
        }
        Ok(Self {
            channels,
            true_params,
            est_params,
        })
    }

    /// Market where the estimates equal the true parameters.
    pub fn complete_info(channels: usize, params: Vec<OperatorParams>) -> Result<Self> {
        Self::new(channels, params.clone(), params)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn len(&self) -> usize {
        self.true_params.len()
    }
    pub fn is_empty(&self) -> bool {
        self.true_params.is_empty()
    }
    pub fn true_params(&self) -> &[OperatorParams] {
        &self.true_params
    }
    pub fn est_params(&self) -> &[OperatorParams] {
        &self.est_params
    }

    pub fn is_complete_info(&self) -> bool {
        self.true_params == self.est_params
    }

    /// Every operator shares one parameter tuple.
    pub fn is_homogeneous(&self) -> bool {
        let first = self.true_params[0];
        self.true_params.iter().all(|p| *p == first)
    }

    /// Same market with every estimate replaced by the true value.
    pub fn with_complete_info(&self) -> Self {
        Self {
            channels: self.channels,
            true_params: self.true_params.clone(),
            est_params: self.true_params.clone(),
        }
    }
}

/// Mean and standard deviation of the net revenue over one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub mean: f64,
    pub std: f64,
}

/// Aggregate statistics of `T` consecutive slots of the stationary AR(1)
/// process: mean `mu*T`, std `sigma*sqrt(T - a(2 - 2a^T + aT))/(1 - a)`.
pub fn epoch_stats(params: &OperatorParams, t: u64) -> EpochStats {
    epoch_stats_real(params, t as f64)
}

/// [`epoch_stats`] on a real-valued duration; used for root finding.
pub fn epoch_stats_real(params: &OperatorParams, t: f64) -> EpochStats {
    let a = params.a;
    let var_factor = if a == 0.0 {
        t
    } else {
        t - a * (2.0 - 2.0 * a.powf(t) + a * t)
    };
    EpochStats {
        mean: params.mu * t,
        std: params.sigma * var_factor.max(0.0).sqrt() / (1.0 - a),
    }
}

/// Per-slot revenues drawn from one seeded run of the AR(1) recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RevenueTrace {
    pub slots: Vec<f64>,
    pub seed: u64,
}

impl RevenueTrace {
    /// Sums of consecutive blocks of `t` slots; a trailing partial block is dropped.
    pub fn epoch_sums(&self, t: usize) -> Vec<f64> {
        self.slots.chunks_exact(t).map(|c| c.iter().sum()).collect()
    }
}

/// Runs `x(1) ~ N(mu, sigma^2)`, `x(t+1) = a x(t) + e(t)` with
/// `e ~ N(mu(1-a), sigma^2 (1-a^2))`. No clamping at zero.
pub fn simulate_ar1(params: &OperatorParams, n_slots: usize, seed: u64) -> RevenueTrace {
    let mut rng = stream_rng(seed, 0);
    RevenueTrace {
        slots: ar1_path(params, n_slots, &mut rng),
        seed,
    }
}

fn ar1_path<R: Rng>(params: &OperatorParams, n_slots: usize, rng: &mut R) -> Vec<f64> {
    let a = params.a;
    let eps_mean = params.mu * (1.0 - a);
    let eps_std = params.sigma * (1.0 - a * a).sqrt();
    let mut out = Vec::with_capacity(n_slots);
    if n_slots == 0 {
        return out;
    }
    let z: f64 = rng.sample(StandardNormal);
    let mut x = params.mu + params.sigma * z;
    out.push(x);
    for _ in 1..n_slots {
        let z: f64 = rng.sample(StandardNormal);
        x = a * x + eps_mean + eps_std * z;
        out.push(x);
    }
    out
}

/// Net revenue of `epochs` independent epochs of length `t`, each started
/// from the stationary distribution.
pub fn sample_epoch_sums(params: &OperatorParams, t: usize, epochs: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    (0..epochs)
        .map(|_| ar1_path(params, t, &mut rng).iter().sum())
        .collect()
}

/// Draws `(Y, Ŷ)` pairs: true epoch revenue and bid, jointly normal with
/// common marginal `N(mean, std^2)` and correlation `rho`.
pub fn sample_bid_revenue(stats: EpochStats, rho: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid("rho", format!("must lie in [0, 1], got {rho}")));
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..n).map(|_| draw_pair(stats, rho, &mut rng)).collect())
}

#[inline]
pub(crate) fn draw_pair<R: Rng>(stats: EpochStats, rho: f64, rng: &mut R) -> (f64, f64) {
    let z_bid: f64 = rng.sample(StandardNormal);
    let z_own: f64 = rng.sample(StandardNormal);
    let bid = stats.mean + stats.std * z_bid;
    let resid = (1.0 - rho * rho).max(0.0).sqrt();
    let revenue = stats.mean + stats.std * (rho * z_bid + resid * z_own);
    (revenue, bid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(mu: f64, sigma: f64, a: f64) -> OperatorParams {
        OperatorParams::new(mu, sigma, a, 0.8, 10.0, LeaseCap::Unbounded).unwrap()
    }

    #[test]
    fn uncorrelated_epoch_std_is_sigma_sqrt_t() {
        let s = epoch_stats(&op(1.0, 1.0, 0.0), 4);
        assert_eq!(s.mean, 4.0);
        assert!((s.std - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_slot_variance_matches_direct_sum() {
        // Var(x1 + x2) = sigma^2 (2 + 2a) = 3
        let s = epoch_stats(&op(1.0, 1.0, 0.5), 2);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(OperatorParams::new(0.0, 1.0, 0.0, 0.5, 1.0, LeaseCap::Unbounded).is_err());
        assert!(OperatorParams::new(1.0, 0.0, 0.0, 0.5, 1.0, LeaseCap::Unbounded).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 1.0, 0.5, 1.0, LeaseCap::Unbounded).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 0.0, 1.2, 1.0, LeaseCap::Unbounded).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 0.0, 1.0, -1.0, LeaseCap::Unbounded).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 0.0, 1.0, 1.0, LeaseCap::Finite(0)).is_err());
        assert!(OperatorParams::new(1.0, 1.0, 0.0, 1.0, 0.0, LeaseCap::Finite(1)).is_ok());
        assert!(Market::new(0, vec![op(1.0, 1.0, 0.0)], vec![op(1.0, 1.0, 0.0)]).is_err());
        assert!(Market::new(1, vec![op(1.0, 1.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn tau_is_sugar_for_a() {
        let via_tau = OperatorParams::from_time_constant(1.0, 0.5, 100.0, 0.8, 100.0, LeaseCap::Unbounded).unwrap();
        let via_a = OperatorParams::new(1.0, 0.5, (-1.0f64 / 100.0).exp(), 0.8, 100.0, LeaseCap::Unbounded).unwrap();
        for t in [1, 2, 17, 306, 5000] {
            let x = epoch_stats(&via_tau, t);
            let y = epoch_stats(&via_a, t);
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
            assert_eq!(x.std.to_bits(), y.std.to_bits());
        }
        assert!((via_tau.tau() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn entry_slot_uses_ceiling_with_boundary_inclusion() {
        assert_eq!(entry_slot(175.0, 1.0), 175);
        assert_eq!(entry_slot(0.0, 1.0), 1);
        assert_eq!(entry_slot(0.3, 0.1), 3);
        assert_eq!(entry_slot(100.0, 0.8), 125);
        assert_eq!(entry_slot(100.5, 1.0), 101);
        assert_eq!(entry_slot(0.2, 1.0), 1);
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let p = op(1.0, 0.5, 0.9);
        assert_eq!(simulate_ar1(&p, 100, 7), simulate_ar1(&p, 100, 7));
        assert_ne!(simulate_ar1(&p, 100, 7).slots, simulate_ar1(&p, 100, 8).slots);
    }

    #[test]
    fn perfect_bid_correlation_makes_bid_equal_revenue() {
        let pairs = sample_bid_revenue(EpochStats { mean: 5.0, std: 2.0 }, 1.0, 1000, 3).unwrap();
        assert!(pairs.iter().all(|(y, b)| y == b));
    }
}
