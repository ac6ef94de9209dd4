//! Expected per-epoch revenue of an operator inside an entrant set.
//!
//! Channels go to the `M̃ = min(M, s)` highest bids. With the bid/revenue pair
//! jointly normal, `E[Y | Ŷ = ŷ] = μ̃ + ρ(ŷ − μ̃)`, so the double integral over
//! `(Y, Ŷ)` collapses to one integral over the standardized bid.

use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, LeaseError, Result};
use crate::market::{draw_pair, epoch_stats, stream_rng, EpochStats, OperatorParams};
use crate::normal;
use crate::quadrature::{integrate_normal_adaptive, GaussHermite};

/// Sorted, duplicate-free operator indices (0-based). Displayed 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntrantSet {
    indices: Vec<usize>,
}

impl EntrantSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    /// Accepts indices in any order; duplicates are rejected.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("entrant set", "duplicate operator index"));
        }
        Ok(Self { indices: v })
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn is_subset(&self, other: &EntrantSet) -> bool {
        self.iter().all(|k| other.contains(k))
    }

    pub fn with(&self, k: usize) -> Self {
        let mut v = self.indices.clone();
        if let Err(pos) = v.binary_search(&k) {
            v.insert(pos, k);
        }
        Self { indices: v }
    }

    pub fn without(&self, k: usize) -> Self {
        Self {
            indices: self.indices.iter().copied().filter(|&j| j != k).collect(),
        }
    }
}

impl fmt::Display for EntrantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, k) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", k + 1)?;
        }
        write!(f, "}}")
    }
}

/// Numerical settings for revenue integrals and oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Starting Gauss–Hermite node count for the homogeneous table; doubled
    /// until successive tables agree within `abs_tol`.
    pub nodes: usize,
    pub mc_samples: usize,
    pub abs_tol: f64,
    /// Relative tolerance of the adaptive heterogeneous integral, scaled by
    /// `|μ̃_k| + σ̃_k`.
    pub rel_tol: f64,
    /// Largest subset count one heterogeneous evaluation may enumerate.
    pub max_terms: u128,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            mc_samples: 100_000,
            abs_tol: 1e-10,
            rel_tol: 1e-11,
            max_terms: 1_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(invalid("nodes", format!("must be >= 16, got {}", self.nodes)));
        }
        if self.mc_samples < 10_000 {
            return Err(invalid(
                "mc_samples",
                format!("must be >= 10000, got {}", self.mc_samples),
            ));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", "must be finite and > 0"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid("rel_tol", "must be finite and > 0"));
        }
        Ok(())
    }
}

const MAX_HERMITE_NODES: usize = 512;

/// `β(1, s)` for `s = 1..=n_max` at a fixed channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    channels: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    nodes_used: usize,
}

impl BetaTable {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn n_max(&self) -> usize {
        self.beta.len()
    }

    /// Node count of the accepted Gauss–Hermite rule.
    pub fn nodes_used(&self) -> usize {
        self.nodes_used
    }

    /// `β(1, s)`, or `None` outside `1..=n_max`.
    pub fn beta(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|i| self.beta.get(i)).copied()
    }

    /// Numerically integrated `∫ G(z, s) φ(z) dz`; equals `M̃/s` analytically.
    pub fn alpha(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|i| self.alpha.get(i)).copied()
    }
}

/// Probability that a given entrant is among the `M̃` highest of `s`
/// i.i.d. bids when its own standardized bid is `z`.
pub fn homog_win_prob(z: f64, s: usize, channels: usize) -> f64 {
    let m_eff = channels.min(s);
    if m_eff == s {
        return 1.0;
    }
    let p = normal::sf(z);
    let q = normal::cdf(z);
    let n = (s - 1) as i32;
    let mut total = 0.0;
    let mut binom = 1.0;
    for r in 0..m_eff as i32 {
        if r > 0 {
            binom *= (n - r + 1) as f64 / r as f64;
        }
        total += binom * p.powi(r) * q.powi(n - r);
    }
    total
}

fn beta_pass(rule: &GaussHermite, n_max: usize, channels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut beta = Vec::with_capacity(n_max);
    let mut alpha = Vec::with_capacity(n_max);
    for s in 1..=n_max {
        if channels >= s {
            beta.push(0.0);
            alpha.push(1.0);
            continue;
        }
        let mut b = 0.0;
        let mut a = 0.0;
        for (&z, &w) in rule.nodes().iter().zip(rule.weights()) {
            let g = homog_win_prob(z, s, channels);
            b += w * z * g;
            a += w * g;
        }
        beta.push(b);
        alpha.push(a);
    }
    (beta, alpha)
}

/// Builds the table, doubling the Hermite node count from `cfg.nodes` until
/// successive passes agree within `cfg.abs_tol`, then checks every `α(s)`
/// against `M̃/s`.
pub fn compute_beta_table(n_max: usize, channels: usize, cfg: &QuadratureConfig) -> Result<BetaTable> {
    if n_max == 0 {
        return Err(invalid("n_max", "must be >= 1"));
    }
    if channels == 0 {
        return Err(invalid("channels", "must be >= 1"));
    }
    let mut nodes = cfg.nodes.max(16);
    let mut prev = beta_pass(&GaussHermite::new(nodes)?, n_max, channels);
    loop {
        let next_nodes = nodes * 2;
        if next_nodes > MAX_HERMITE_NODES {
            return Err(LeaseError::QuadratureNonConvergence(format!(
                "beta table did not stabilize within {} at {nodes} nodes",
                cfg.abs_tol
            )));
        }
        let next = beta_pass(&GaussHermite::new(next_nodes)?, n_max, channels);
        let delta = prev
            .0
            .iter()
            .zip(&next.0)
            .chain(prev.1.iter().zip(&next.1))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        prev = next;
        nodes = next_nodes;
        if delta < cfg.abs_tol {
            break;
        }
    }
    let (beta, alpha) = prev;
    for (i, &a) in alpha.iter().enumerate() {
        let s = i + 1;
        let want = channels.min(s) as f64 / s as f64;
        if (a - want).abs() > cfg.abs_tol {
            return Err(LeaseError::QuadratureNonConvergence(format!(
                "alpha({s}) = {a} differs from {want} by more than {}",
                cfg.abs_tol
            )));
        }
    }
    Ok(BetaTable {
        channels,
        beta,
        alpha,
        nodes_used: nodes,
    })
}

/// Closed form for `s` statistically identical entrants:
/// `(M̃/s) μ̃(T) + ρ β(1, s) σ̃(T)`.
pub fn revenue_homog(params: &OperatorParams, s: usize, t: u64, beta: &BetaTable) -> Result<f64> {
    if s == 0 {
        return Err(invalid("s", "must be >= 1"));
    }
    if t == 0 {
        return Err(invalid("T", "must be >= 1"));
    }
    let b = beta
        .beta(s)
        .ok_or_else(|| invalid("s", format!("{s} exceeds beta table size {}", beta.n_max())))?;
    let stats = epoch_stats(params, t);
    let m_eff = beta.channels().min(s);
    Ok(m_eff as f64 / s as f64 * stats.mean + params.rho() * b * stats.std)
}

/// Number of subsets `W ⊆ S_k` with `|W| < M̃` that the exact sum visits.
pub fn subset_terms(s: usize, channels: usize) -> u128 {
    let n = s.saturating_sub(1) as u128;
    let m_eff = channels.min(s) as u128;
    if m_eff == 0 {
        return 0;
    }
    let mut total: u128 = 1;
    let mut binom: u128 = 1;
    for r in 1..m_eff {
        binom = binom.saturating_mul(n - r + 1) / r;
        total = total.saturating_add(binom);
    }
    total
}

/// Sum over subsets `W` of the rivals with `|W| <= max_w` of
/// `Π_{j∈W} p_j · Π_{j∉W} q_j`: the probability that fewer than `max_w + 1`
/// rivals outbid. Enumerated depth-first with shared prefix products.
fn enumerate_win_prob(p: &[f64], q: &[f64], max_w: usize) -> f64 {
    fn go(p: &[f64], q: &[f64], j: usize, chosen: usize, max_w: usize, prod: f64) -> f64 {
        if j == p.len() {
            return prod;
        }
        if prod == 0.0 {
            return 0.0;
        }
        let mut acc = go(p, q, j + 1, chosen, max_w, prod * q[j]);
        if chosen < max_w {
            acc += go(p, q, j + 1, chosen + 1, max_w, prod * p[j]);
        }
        acc
    }
    go(p, q, 0, 0, max_w, 1.0)
}

/// Expected per-epoch revenue `R_k(S, T)` of entrant `k` for arbitrary
/// operator parameters, by adaptive quadrature over the standardized bid of
/// `k`. `params` is indexed by operator; only members of `set` are read.
pub fn revenue_hetero(
    params: &[OperatorParams],
    channels: usize,
    set: &EntrantSet,
    k: usize,
    t: u64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if t == 0 {
        return Err(invalid("T", "must be >= 1"));
    }
    if channels == 0 {
        return Err(invalid("channels", "must be >= 1"));
    }
    if let Some(&bad) = set.indices().iter().find(|&&j| j >= params.len()) {
        return Err(LeaseError::IndexOutOfRange {
            index: bad,
            len: params.len(),
        });
    }
    if !set.contains(k) {
        return Err(LeaseError::NotInSet { index: k });
    }
    let s = set.len();
    let m_eff = channels.min(s);
    let own = epoch_stats(&params[k], t);
    if m_eff == s {
        return Ok(own.mean);
    }
    let terms = subset_terms(s, channels);
    if terms > cfg.max_terms {
        return Err(LeaseError::CombinatoricsBudget {
            terms,
            budget: cfg.max_terms,
        });
    }
    let rivals: Vec<EpochStats> = set
        .iter()
        .filter(|&j| j != k)
        .map(|j| epoch_stats(&params[j], t))
        .collect();
    let rho = params[k].rho();
    let mut p = vec![0.0; rivals.len()];
    let mut q = vec![0.0; rivals.len()];
    let integrand = |z: f64| {
        let bid = own.mean + own.std * z;
        for (i, r) in rivals.iter().enumerate() {
            let u = (bid - r.mean) / r.std;
            p[i] = normal::sf(u);
            q[i] = normal::cdf(u);
        }
        let g = enumerate_win_prob(&p, &q, m_eff - 1);
        (own.mean + rho * own.std * z) * g
    };
    let tol = cfg.rel_tol * (own.mean.abs() + own.std);
    integrate_normal_adaptive(integrand, tol)
}

/// Monte-Carlo estimate of every entrant's expected epoch revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct McRevenue {
    /// Operator indices, aligned with the vectors below.
    pub operators: Vec<usize>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub wins: Vec<u64>,
    pub epochs: usize,
}

impl McRevenue {
    pub fn position(&self, k: usize) -> Option<usize> {
        self.operators.iter().position(|&j| j == k)
    }
}

/// Epochs per independently seeded chunk of the oracle.
pub const MC_CHUNK: usize = 4096;

struct ChunkAcc {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    wins: Vec<u64>,
}

/// Simulates whole auctions: each epoch draws `(Y_k, Ŷ_k)` for every entrant,
/// gives the `M̃` channels to the highest bids (lower index on ties) and
/// credits `Y_k` to winners. Chunk `c` of `MC_CHUNK` epochs uses stream `c` of
/// `seed`, and chunk totals are combined in chunk order, so the result does
/// not depend on thread count.
pub fn mc_revenue_oracle(
    params: &[OperatorParams],
    channels: usize,
    set: &EntrantSet,
    t: u64,
    epochs: usize,
    seed: u64,
) -> Result<McRevenue> {
    if epochs < 1000 {
        return Err(invalid("epochs", format!("must be >= 1000, got {epochs}")));
    }
    if t == 0 {
        return Err(invalid("T", "must be >= 1"));
    }
    if channels == 0 {
        return Err(invalid("channels", "must be >= 1"));
    }
    if let Some(&bad) = set.indices().iter().find(|&&j| j >= params.len()) {
        return Err(LeaseError::IndexOutOfRange {
            index: bad,
            len: params.len(),
        });
    }
    let s = set.len();
    let m_eff = channels.min(s);
    let stats: Vec<(EpochStats, f64)> = set
        .iter()
        .map(|j| (epoch_stats(&params[j], t), params[j].rho()))
        .collect();
    let n_chunks = epochs.div_ceil(MC_CHUNK);
    let chunks: Vec<ChunkAcc> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(epochs - c * MC_CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            let mut acc = ChunkAcc {
                sum: vec![0.0; s],
                sum_sq: vec![0.0; s],
                wins: vec![0; s],
            };
            let mut draws = vec![(0.0, 0.0); s];
            let mut order: Vec<usize> = (0..s).collect();
            for _ in 0..len {
                for (d, &(st, rho)) in draws.iter_mut().zip(&stats) {
                    *d = draw_pair(st, rho, &mut rng);
                }
                order.sort_by(|&a, &b| draws[b].1.total_cmp(&draws[a].1).then(a.cmp(&b)));
                for &i in &order[..m_eff] {
                    let y = draws[i].0;
                    acc.sum[i] += y;
                    acc.sum_sq[i] += y * y;
                    acc.wins[i] += 1;
                }
            }
            acc
        })
        .collect();
    let mut sum = vec![0.0; s];
    let mut sum_sq = vec![0.0; s];
    let mut wins = vec![0u64; s];
    for c in &chunks {
        for i in 0..s {
            sum[i] += c.sum[i];
            sum_sq[i] += c.sum_sq[i];
            wins[i] += c.wins[i];
        }
    }
    let n = epochs as f64;
    let mean: Vec<f64> = sum.iter().map(|x| x / n).collect();
    let std_err = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    Ok(McRevenue {
        operators: set.indices().to_vec(),
        mean,
        std_err,
        wins,
        epochs,
    })
}
