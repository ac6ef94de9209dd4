//! Seeded parameter sweeps producing one CSV row per (grid point, replicate).

use log::warn;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{Config, ExperimentKind, ExperimentSpec, SamplingSpec};
use crate::error::{invalid, LeaseError, Result};
use crate::game::{RevenueModel, RevenueView};
use crate::market::{stream_rng, LeaseCap, Market, OperatorParams};
use crate::optimizer::{solve_homogeneous, solve_subop, solve_sweep, SolveResult};
use crate::output::fmt_g12;
use crate::revenue::{compute_beta_table, mc_revenue_oracle, revenue_hetero, EntrantSet, QuadratureConfig};
use crate::validate::Z_LIMIT;

/// Rejection-sampling attempts per truncated-Gaussian draw.
pub const TRUNCATED_MAX_TRIES: usize = 10_000;

/// Sampling windows of the trend sweeps' heterogeneous markets.
pub const TREND_WINDOWS: Windows = Windows {
    mu: [0.8, 1.2],
    sigma: [0.4, 0.6],
    tau: [50.0, 150.0],
    rho: [0.7, 0.9],
    mer: [50.0, 150.0],
    max_lease: None,
};

/// Sampling windows of the incomplete-information study's true markets.
pub const INCOMPLETE_WINDOWS: Windows = Windows {
    mu: [0.8, 1.2],
    sigma: [0.4, 0.6],
    tau: [150.0, 250.0],
    rho: [0.5, 0.7],
    mer: [50.0, 150.0],
    max_lease: Some([500.0, 2000.0]),
};

/// Truncated Gaussians of the SUBOP comparison: `(mean, lo, hi)` with the
/// standard deviation set to `cv * mean`.
pub const SUBOP_MU: (f64, f64, f64) = (1.0, 0.5, 1.5);
pub const SUBOP_MER: (f64, f64, f64) = (500.0, 100.0, 900.0);
pub const SUBOP_MAX_LEASE: (f64, f64, f64) = (5000.0, 900.0, 9100.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub tau: [f64; 2],
    pub rho: [f64; 2],
    pub mer: [f64; 2],
    pub max_lease: Option<[f64; 2]>,
}

impl Windows {
    fn overridden(mut self, s: &SamplingSpec) -> Self {
        if let Some(w) = s.mu {
            self.mu = w;
        }
        if let Some(w) = s.sigma {
            self.sigma = w;
        }
        if let Some(w) = s.tau {
            self.tau = w;
        }
        if let Some(w) = s.rho {
            self.rho = w;
        }
        if let Some(w) = s.mer {
            self.mer = w;
        }
        if s.max_lease.is_some() {
            self.max_lease = s.max_lease;
        }
        self
    }

    /// Moves the window of `param` to be centred on `center`, keeping its width.
    fn recentred(mut self, param: &str, center: f64) -> Result<Self> {
        let shift = |w: [f64; 2]| {
            let half = 0.5 * (w[1] - w[0]);
            [center - half, center + half]
        };
        match param {
            "mu" => self.mu = shift(self.mu),
            "sigma" => self.sigma = shift(self.sigma),
            "tau" => self.tau = shift(self.tau),
            "rho" => self.rho = shift(self.rho),
            "mer" => self.mer = shift(self.mer),
            "n" => {}
            other => return Err(invalid("experiment.parameter", format!("cannot sweep `{other}` here"))),
        }
        Ok(self)
    }
}

/// SplitMix64 mix of the experiment seed with the row coordinates.
pub fn derive_seed(seed: u64, grid_index: usize, replicate: u32) -> u64 {
    let mut z = seed
        ^ (grid_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (replicate as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, w: [f64; 2]) -> f64 {
    if w[0] == w[1] {
        w[0]
    } else {
        rng.random_range(w[0].min(w[1])..w[0].max(w[1]))
    }
}

/// Normal `(mean, sd)` restricted to `[lo, hi]` by rejection.
pub fn truncated_gaussian(rng: &mut ChaCha8Rng, mean: f64, sd: f64, lo: f64, hi: f64) -> Result<f64> {
    if sd == 0.0 {
        return Ok(mean.clamp(lo, hi));
    }
    for _ in 0..TRUNCATED_MAX_TRIES {
        let z: f64 = rng.sample(StandardNormal);
        let x = mean + sd * z;
        if (lo..=hi).contains(&x) {
            return Ok(x);
        }
    }
    Err(LeaseError::Sampling(format!(
        "no draw of N({mean}, {sd}^2) fell in [{lo}, {hi}] after {TRUNCATED_MAX_TRIES} tries"
    )))
}

fn clamp_logged(name: &str, x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo || x > hi {
        let c = x.clamp(lo, hi);
        warn!("sampled {name} = {x} outside [{lo}, {hi}], clamped to {c}");
        c
    } else {
        x
    }
}

const TINY: f64 = 1e-9;

fn sample_operator(rng: &mut ChaCha8Rng, w: &Windows) -> Result<OperatorParams> {
    let mu = clamp_logged("mu", uniform(rng, w.mu), TINY, f64::MAX);
    let sigma = clamp_logged("sigma", uniform(rng, w.sigma), TINY, f64::MAX);
    let tau = clamp_logged("tau", uniform(rng, w.tau), TINY, f64::MAX);
    let rho = clamp_logged("rho", uniform(rng, w.rho), 0.0, 1.0);
    let mer = clamp_logged("mer", uniform(rng, w.mer), 0.0, f64::MAX);
    let cap = match w.max_lease {
        Some(win) => LeaseCap::Finite(clamp_logged("max_lease", uniform(rng, win).round(), 1.0, f64::MAX) as u64),
        None => LeaseCap::Unbounded,
    };
    OperatorParams::from_time_constant(mu, sigma, tau, rho, mer, cap)
}

/// One output row. `extra` holds the kind-specific trailing columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub value: f64,
    pub replicate: u32,
    pub seed: u64,
    pub t_star: u64,
    pub u_true: f64,
    pub u_perceived: f64,
    pub s_star: usize,
    pub s_l_star: usize,
    pub eval_count: u64,
    pub extra: Vec<f64>,
    pub status: String,
}

pub const COMMON_COLUMNS: [&str; 9] = [
    "value",
    "replicate",
    "seed",
    "t_star",
    "u_true",
    "u_perceived",
    "s_star",
    "s_l_star",
    "eval_count",
];

pub fn extra_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::SubopComparison => &["t_subop", "u_subop", "delta_u_pct"],
        ExperimentKind::IncompleteInfo => &["t_star_complete", "u_complete", "delta_u_pct"],
        _ => &[],
    }
}

pub const VALIDATE_COLUMNS: [&str; 10] = [
    "value",
    "replicate",
    "seed",
    "operator",
    "analytic",
    "sampled",
    "std_err",
    "z",
    "pass",
    "status",
];

impl ResultRow {
    fn failed(value: f64, replicate: u32, seed: u64, n_extra: usize, err: &LeaseError) -> Self {
        Self {
            value,
            replicate,
            seed,
            t_star: 0,
            u_true: f64::NAN,
            u_perceived: f64::NAN,
            s_star: 0,
            s_l_star: 0,
            eval_count: 0,
            extra: vec![f64::NAN; n_extra],
            status: format!("error: {err}"),
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        let mut r = vec![
            fmt_g12(self.value),
            self.replicate.to_string(),
            self.seed.to_string(),
            self.t_star.to_string(),
            fmt_g12(self.u_true),
            fmt_g12(self.u_perceived),
            self.s_star.to_string(),
            self.s_l_star.to_string(),
            self.eval_count.to_string(),
        ];
        r.extend(self.extra.iter().map(|&x| fmt_g12(x)));
        r.push(self.status.clone());
        r
    }
}

/// Run-time settings that may be overridden from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub quad: QuadratureConfig,
    pub horizon: Option<u64>,
    pub mc_epochs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            horizon: None,
            mc_epochs: 100_000,
        }
    }
}

/// Header and formatted rows, sorted by grid point then replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub results: Vec<ResultRow>,
}

/// Runs the `[experiment]` block of `cfg`.
pub fn run_experiment(cfg: &Config, opts: &RunOptions) -> Result<ExperimentOutput> {
    let spec = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| invalid("experiment", "config has no [experiment] section"))?;
    spec.validate()?;
    let horizon = opts.horizon.or(cfg.market.horizon);
    if spec.kind == ExperimentKind::Validate {
        return run_validate(cfg, spec, opts);
    }
    let base = cfg.market()?;
    let swept = cfg.swept_indices();
    check_parameter(spec)?;
    let jobs: Vec<(usize, f64, u32)> = spec
        .grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &v)| (0..spec.replications).map(move |r| (gi, v, r)))
        .collect();
    let n_extra = extra_columns(spec.kind).len();
    let results: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(gi, value, rep)| {
            let seed = derive_seed(spec.seed, gi, rep);
            run_replicate(&base, &swept, spec, value, seed, horizon, &opts.quad)
                .map(|mut row| {
                    row.replicate = rep;
                    row
                })
                .unwrap_or_else(|e| ResultRow::failed(value, rep, seed, n_extra, &e))
        })
        .collect();
    let mut header: Vec<&'static str> = COMMON_COLUMNS.to_vec();
    header.extend_from_slice(extra_columns(spec.kind));
    header.push("status");
    Ok(ExperimentOutput {
        kind: spec.kind,
        header,
        rows: results.iter().map(ResultRow::to_record).collect(),
        results,
    })
}

fn check_parameter(spec: &ExperimentSpec) -> Result<()> {
    let allowed: &[&str] = match spec.kind {
        ExperimentKind::TrendSweep => &["mu", "sigma", "tau", "rho", "mer", "n"],
        ExperimentKind::SubopComparison => &["cv_mu", "cv_mer_lease"],
        ExperimentKind::MerDiscontinuity => &["mer_bar"],
        ExperimentKind::IncompleteInfo => &["all", "mu", "sigma", "tau", "rho", "mer", "max_lease"],
        ExperimentKind::Validate => &["t"],
    };
    if allowed.contains(&spec.parameter.as_str()) {
        Ok(())
    } else {
        Err(invalid(
            "experiment.parameter",
            format!(
                "`{}` is not one of {:?} for {}",
                spec.parameter,
                allowed,
                spec.kind.name()
            ),
        ))
    }
}

fn row_from(value: f64, seed: u64, res: &SolveResult, s_l_star: usize, extra: Vec<f64>) -> ResultRow {
    ResultRow {
        value,
        replicate: 0,
        seed,
        t_star: res.t_star,
        u_true: res.u_true,
        u_perceived: res.u_perceived,
        s_star: res.entrants_true.len(),
        s_l_star,
        eval_count: res.eval_count,
        extra,
        status: "ok".into(),
    }
}

fn largest_true(model: &RevenueModel<'_>, t: u64) -> Result<usize> {
    Ok(model.largest_entrants(RevenueView::True, t)?.len())
}

/// Runs one replicate in isolation; `seed` is the value stored in its row.
pub fn run_replicate(
    base: &Market,
    swept: &[usize],
    spec: &ExperimentSpec,
    value: f64,
    seed: u64,
    horizon: Option<u64>,
    quad: &QuadratureConfig,
) -> Result<ResultRow> {
    let mut rng = stream_rng(seed, 0);
    match spec.kind {
        ExperimentKind::TrendSweep => match &spec.sampling {
            None => trend_homogeneous(base, &spec.parameter, value, seed, quad),
            Some(s) => {
                let n = if spec.parameter == "n" {
                    value.round() as usize
                } else {
                    s.n.unwrap_or(base.len())
                };
                let w = TREND_WINDOWS.overridden(s).recentred(&spec.parameter, value)?;
                let ops = (0..n)
                    .map(|_| sample_operator(&mut rng, &w))
                    .collect::<Result<Vec<_>>>()?;
                let market = Market::complete_info(base.channels(), ops)?;
                let model = RevenueModel::new(&market, *quad)?;
                let res = solve_sweep(&model, horizon)?;
                let sl = largest_true(&model, res.t_star)?;
                Ok(row_from(value, seed, &res, sl, vec![]))
            }
        },
        ExperimentKind::SubopComparison => {
            let proto = base.true_params()[0];
            let n = spec.sampling.as_ref().and_then(|s| s.n).unwrap_or(base.len());
            let mut ops = Vec::with_capacity(n);
            for _ in 0..n {
                let p = match spec.parameter.as_str() {
                    "cv_mu" => {
                        let (m, lo, hi) = SUBOP_MU;
                        let mu = truncated_gaussian(&mut rng, m, value * m, lo, hi)?;
                        OperatorParams::new(
                            mu,
                            proto.sigma(),
                            proto.a(),
                            proto.rho(),
                            proto.mer(),
                            proto.max_lease(),
                        )?
                    }
                    _ => {
                        let (m, lo, hi) = SUBOP_MER;
                        let mer = truncated_gaussian(&mut rng, m, value * m, lo, hi)?;
                        let (m, lo, hi) = SUBOP_MAX_LEASE;
                        let cap = truncated_gaussian(&mut rng, m, value * m, lo, hi)?.round() as u64;
                        proto.with_mer(mer)?.with_max_lease(LeaseCap::Finite(cap))?
                    }
                };
                ops.push(p);
            }
            let market = Market::complete_info(base.channels(), ops)?;
            let model = RevenueModel::new(&market, *quad)?;
            let res = solve_sweep(&model, horizon)?;
            let sub = solve_subop(&model, horizon)?;
            let sl = largest_true(&model, res.t_star)?;
            let delta = relative_gain_pct(res.u_perceived, sub.u_perceived);
            Ok(row_from(
                value,
                seed,
                &res,
                sl,
                vec![sub.t_star as f64, sub.u_perceived, delta],
            ))
        }
        ExperimentKind::MerDiscontinuity => {
            if swept.is_empty() || swept.iter().any(|&k| k >= base.len()) {
                return Err(invalid(
                    "operators.swept",
                    "mer-discontinuity needs operators marked `swept = true`",
                ));
            }
            let mut truth = base.true_params().to_vec();
            let mut est = base.est_params().to_vec();
            for &k in swept {
                truth[k] = truth[k].with_mer(value)?;
                est[k] = est[k].with_mer(value)?;
            }
            let market = Market::new(base.channels(), truth, est)?;
            let model = RevenueModel::new(&market, *quad)?;
            let res = solve_sweep(&model, horizon)?;
            let sl = largest_true(&model, res.t_star)?;
            Ok(row_from(value, seed, &res, sl, vec![]))
        }
        ExperimentKind::IncompleteInfo => {
            let w = match &spec.sampling {
                Some(s) => INCOMPLETE_WINDOWS.overridden(s),
                None => INCOMPLETE_WINDOWS,
            };
            let n = spec.sampling.as_ref().and_then(|s| s.n).unwrap_or(base.len());
            let truth = (0..n)
                .map(|_| sample_operator(&mut rng, &w))
                .collect::<Result<Vec<_>>>()?;
            let est = truth
                .iter()
                .map(|p| perturb(&mut rng, p, &spec.parameter, value / 100.0))
                .collect::<Result<Vec<_>>>()?;
            let complete = Market::complete_info(base.channels(), truth.clone())?;
            let model_c = RevenueModel::new(&complete, *quad)?;
            let opt = solve_sweep(&model_c, horizon)?;
            let market = Market::new(base.channels(), truth, est)?;
            let model = RevenueModel::with_beta(&market, *quad, model_c.beta().clone());
            let res = solve_sweep(&model, horizon)?;
            let sl = largest_true(&model, res.t_star)?;
            let delta = relative_loss_pct(opt.u_true, res.u_true);
            Ok(row_from(
                value,
                seed,
                &res,
                sl,
                vec![opt.t_star as f64, opt.u_true, delta],
            ))
        }
        ExperimentKind::Validate => Err(invalid("experiment.kind", "validate rows are produced by run_validate")),
    }
}

/// `(a - b) / b` in percent; infinite when only `b` is zero.
pub fn relative_gain_pct(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / b * 100.0
    }
}

/// `(a - b) / a` in percent; zero when both are zero.
pub fn relative_loss_pct(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        if b == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (a - b) / a * 100.0
    }
}

/// Draws each selected estimate uniformly within `±frac` of its true value.
fn perturb(rng: &mut ChaCha8Rng, p: &OperatorParams, which: &str, frac: f64) -> Result<OperatorParams> {
    let on = |name: &str| which == "all" || which == name;
    let mut draw = |name: &str, x: f64| {
        if on(name) {
            x * (1.0 + frac * (2.0 * rng.random::<f64>() - 1.0))
        } else {
            x
        }
    };
    let mu = draw("mu", p.mu());
    let sigma = draw("sigma", p.sigma());
    let tau = p.tau();
    let tau_hat = draw("tau", tau);
    let rho = clamp_logged("rho estimate", draw("rho", p.rho()), 0.0, 1.0);
    let mer = draw("mer", p.mer());
    let cap = match p.max_lease() {
        LeaseCap::Finite(c) => LeaseCap::Finite(draw("max_lease", c as f64).round().max(1.0) as u64),
        LeaseCap::Unbounded => LeaseCap::Unbounded,
    };
    let a = if tau_hat == tau { p.a() } else { (-1.0 / tau_hat).exp() };
    OperatorParams::new(mu, sigma, a, rho, mer, cap)
}

fn trend_homogeneous(base: &Market, param: &str, value: f64, seed: u64, quad: &QuadratureConfig) -> Result<ResultRow> {
    if !(base.is_homogeneous() && base.is_complete_info()) {
        return Err(invalid(
            "operators",
            "homogeneous trend sweeps need identical operators with complete information (or a [experiment.sampling] block)",
        ));
    }
    let p = base.true_params()[0];
    let mut n = base.len();
    let (mut mu, mut sigma, mut a, mut rho, mut mer) = (p.mu(), p.sigma(), p.a(), p.rho(), p.mer());
    match param {
        "mu" => mu = value,
        "sigma" => sigma = value,
        "tau" => a = crate::market::autocorrelation_from_tau(value)?,
        "rho" => rho = value,
        "mer" => mer = value,
        "n" => n = value.round() as usize,
        other => return Err(invalid("experiment.parameter", format!("cannot sweep `{other}`"))),
    }
    let op = OperatorParams::new(mu, sigma, a, rho, mer, p.max_lease())?;
    let beta = compute_beta_table(n.max(1), base.channels(), quad)?;
    let res = solve_homogeneous(&op, n, &beta)?;
    let s_l = if res.t_star >= op.entry_slot() && op.max_lease().admits(res.t_star) {
        n
    } else {
        0
    };
    Ok(row_from(value, seed, &res, s_l, vec![]))
}

fn run_validate(cfg: &Config, spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    check_parameter(spec)?;
    let market = cfg.market()?;
    let all = EntrantSet::full(market.len());
    let mut rows = Vec::new();
    for (gi, &tv) in spec.grid.iter().enumerate() {
        let t = tv.round() as u64;
        if t == 0 {
            return Err(invalid("experiment.grid", "lease durations must be >= 1"));
        }
        for rep in 0..spec.replications {
            let seed = derive_seed(spec.seed, gi, rep);
            let mc = mc_revenue_oracle(market.true_params(), market.channels(), &all, t, opts.mc_epochs, seed)?;
            for (pos, k) in all.iter().enumerate() {
                let r = revenue_hetero(market.true_params(), market.channels(), &all, k, t, &opts.quad)?;
                let se = mc.std_err[pos];
                let z = if se > 0.0 { (r - mc.mean[pos]) / se } else { 0.0 };
                rows.push(vec![
                    fmt_g12(tv),
                    rep.to_string(),
                    seed.to_string(),
                    (k + 1).to_string(),
                    fmt_g12(r),
                    fmt_g12(mc.mean[pos]),
                    fmt_g12(se),
                    fmt_g12(z),
                    (z.abs() <= Z_LIMIT).to_string(),
                    "ok".into(),
                ]);
            }
        }
    }
    Ok(ExperimentOutput {
        kind: spec.kind,
        header: VALIDATE_COLUMNS.to_vec(),
        rows,
        results: vec![],
    })
}
