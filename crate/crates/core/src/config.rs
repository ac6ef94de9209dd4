//! TOML instance and experiment files.
//!
//! ```toml
//! [market]
//! channels = 2
//! horizon = 5000          # optional cap for unbounded max_lease
//!
//! [[operators]]
//! count = 8               # optional, replicates the entry
//! mu = 1.0
//! sigma = 0.5
//! tau = 100.0             # or `a`, not both
//! rho = 0.8
//! mer = 100.0
//! max_lease = "unbounded" # or a positive integer
//!
//! [operators.estimate]    # optional regulator estimates; unset fields copy the truth
//! mu = 1.1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LeaseError, Result};
use crate::market::{autocorrelation_from_tau, LeaseCap, Market, OperatorParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub market: MarketSection,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub channels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

/// `max_lease` as written in a file: an integer or `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapSpec {
    Finite(u64),
    Keyword(CapKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapKeyword {
    #[serde(rename = "unbounded")]
    Unbounded,
}

impl From<CapSpec> for LeaseCap {
    fn from(c: CapSpec) -> Self {
        match c {
            CapSpec::Finite(n) => LeaseCap::Finite(n),
            CapSpec::Keyword(CapKeyword::Unbounded) => LeaseCap::Unbounded,
        }
    }
}

impl From<LeaseCap> for CapSpec {
    fn from(c: LeaseCap) -> Self {
        match c {
            LeaseCap::Finite(n) => CapSpec::Finite(n),
            LeaseCap::Unbounded => CapSpec::Keyword(CapKeyword::Unbounded),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub mu: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub rho: f64,
    pub mer: f64,
    pub max_lease: CapSpec,
    /// Marks operators whose MER a `mer-discontinuity` experiment sweeps.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub swept: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lease: Option<CapSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TrendSweep,
    SubopComparison,
    MerDiscontinuity,
    IncompleteInfo,
    Validate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TrendSweep => "trend-sweep",
            ExperimentKind::SubopComparison => "subop-comparison",
            ExperimentKind::MerDiscontinuity => "mer-discontinuity",
            ExperimentKind::IncompleteInfo => "incomplete-info",
            ExperimentKind::Validate => "validate",
        }
    }
}

/// Uniform sampling windows `[lo, hi]` for heterogeneous instances. Unset
/// windows fall back to per-kind defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mer: Option<[f64; 2]>,
    /// Absent means unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lease: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub parameter: String,
    pub grid: Vec<f64>,
    #[serde(default = "one")]
    pub replications: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
}

fn one() -> u32 {
    1
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(invalid("experiment.grid", "must not be empty"));
        }
        if self.grid.iter().any(|g| !g.is_finite()) {
            return Err(invalid("experiment.grid", "values must be finite"));
        }
        if self.grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("experiment.grid", "must be sorted ascending"));
        }
        if self.replications == 0 {
            return Err(invalid("experiment.replications", "must be >= 1"));
        }
        Ok(())
    }
}

fn resolve_a(field_a: &'static str, a: Option<f64>, tau: Option<f64>) -> Result<Option<f64>> {
    match (a, tau) {
        (Some(_), Some(_)) => Err(invalid(field_a, "give either `a` or `tau`, not both")),
        (Some(a), None) => Ok(Some(a)),
        (None, Some(t)) => autocorrelation_from_tau(t).map(Some),
        (None, None) => Ok(None),
    }
}

impl OperatorSpec {
    pub fn from_params(p: &OperatorParams) -> Self {
        Self {
            count: None,
            mu: p.mu(),
            sigma: p.sigma(),
            a: Some(p.a()),
            tau: None,
            rho: p.rho(),
            mer: p.mer(),
            max_lease: p.max_lease().into(),
            swept: false,
            estimate: None,
        }
    }

    /// True and estimated parameters of one operator.
    pub fn build(&self) -> Result<(OperatorParams, OperatorParams)> {
        let a = resolve_a("a", self.a, self.tau)?.ok_or_else(|| invalid("a", "one of `a` or `tau` is required"))?;
        let truth = OperatorParams::new(self.mu, self.sigma, a, self.rho, self.mer, self.max_lease.into())?;
        let est = match &self.estimate {
            None => truth,
            Some(e) => OperatorParams::new(
                e.mu.unwrap_or(truth.mu()),
                e.sigma.unwrap_or(truth.sigma()),
                resolve_a("estimate.a", e.a, e.tau)?.unwrap_or(truth.a()),
                e.rho.unwrap_or(truth.rho()),
                e.mer.unwrap_or(truth.mer()),
                e.max_lease.map(Into::into).unwrap_or(truth.max_lease()),
            )?,
        };
        Ok((truth, est))
    }
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s).map_err(|e| LeaseError::InvalidParameter {
            field: "config",
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.market.channels == 0 {
            return Err(invalid("market.channels", "must be >= 1"));
        }
        if self.market.horizon == Some(0) {
            return Err(invalid("market.horizon", "must be >= 1"));
        }
        for op in &self.operators {
            if op.count == Some(0) {
                return Err(invalid("operators.count", "must be >= 1"));
            }
            op.build()?;
        }
        if let Some(e) = &self.experiment {
            e.validate()?;
        }
        Ok(())
    }

    /// Operator specs with `count` expanded.
    pub fn expanded_operators(&self) -> Vec<&OperatorSpec> {
        self.operators
            .iter()
            .flat_map(|op| std::iter::repeat_n(op, op.count.unwrap_or(1)))
            .collect()
    }

    pub fn market(&self) -> Result<Market> {
        let mut truth = Vec::new();
        let mut est = Vec::new();
        for op in self.expanded_operators() {
            let (t, e) = op.build()?;
            truth.push(t);
            est.push(e);
        }
        if truth.is_empty() {
            return Err(invalid("operators", "at least one operator is required"));
        }
        Market::new(self.market.channels, truth, est)
    }

    /// Indices (after expansion) of operators marked `swept`.
    pub fn swept_indices(&self) -> Vec<usize> {
        self.expanded_operators()
            .iter()
            .enumerate()
            .filter(|(_, op)| op.swept)
            .map(|(i, _)| i)
            .collect()
    }
}
