//! Optimal lease durations for exclusive-use spectrum licences.
//!
//! A regulator picks the lease duration `T`; operators then decide whether to
//! enter an auction for `M` identical channels, given their expected revenue
//! over a lease. The crate models per-slot revenue as a stationary AR(1)
//! process, evaluates the resulting auction revenues, solves the entry game
//! and searches `T` for the best spectrum utilization.

pub mod config;
pub mod error;
pub mod experiments;
pub mod game;
pub mod market;
pub mod normal;
pub mod optimizer;
pub mod output;
pub mod quadrature;
pub mod revenue;
pub mod validate;

pub use error::{LeaseError, Result};
pub use game::{ObjectiveValue, RevenueModel, RevenueView};
pub use market::{epoch_stats, simulate_ar1, EpochStats, LeaseCap, Market, OperatorParams, RevenueTrace};
pub use optimizer::{brute_force, solve_homogeneous, solve_subop, solve_sweep, SolveResult};
pub use revenue::{compute_beta_table, revenue_hetero, revenue_homog, BetaTable, EntrantSet, QuadratureConfig};
