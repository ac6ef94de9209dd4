//! C ABI over the spectrum-lease solvers.
//!
//! Markets live behind an opaque `SlMarket` handle. Every fallible call
//! returns an `SlStatus`; on failure the message is kept per thread and can be
//! copied out with `sl_last_error_message`. Panics are caught at the boundary
//! and reported as `SL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spectrum_lease::{
    brute_force, compute_beta_table, epoch_stats, solve_homogeneous, solve_subop, solve_sweep, EntrantSet, LeaseCap,
    LeaseError, Market, OperatorParams, QuadratureConfig, RevenueModel, RevenueView, SolveResult,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    MarketShape = 3,
    IndexOutOfRange = 4,
    NotInSet = 5,
    CombinatoricsBudget = 6,
    QuadratureNonConvergence = 7,
    UnboundedHorizon = 8,
    NotHomogeneous = 9,
    Sampling = 10,
    Panic = 11,
}

/// Whose parameters a revenue is evaluated with.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlView {
    True = 0,
    /// Operator `self_index` knows itself and estimates the rest.
    SelfView = 1,
    Regulator = 2,
}

/// Parameters of one operator. `max_lease == 0` means unbounded.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlOperator {
    pub mu: f64,
    pub sigma: f64,
    /// AR(1) autocorrelation in `[0, 1)`.
    pub a: f64,
    pub rho: f64,
    pub mer: f64,
    pub max_lease: u64,
}

/// Solver output. Entrant counts refer to the sets at `t_star`; the members
/// can be listed with `sl_perceived_entrants` and `sl_equilibrium_entrants`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlSolveResult {
    pub t_star: u64,
    pub u_perceived: f64,
    pub u_true: f64,
    pub n_perceived: usize,
    pub n_true: usize,
    pub eval_count: u64,
}

/// Opaque market handle.
pub struct SlMarket {
    market: Market,
    quad: QuadratureConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LeaseError) -> SlStatus {
    match e {
        LeaseError::InvalidParameter { .. } => SlStatus::InvalidParameter,
        LeaseError::MarketShape { .. } => SlStatus::MarketShape,
        LeaseError::IndexOutOfRange { .. } => SlStatus::IndexOutOfRange,
        LeaseError::NotInSet { .. } => SlStatus::NotInSet,
        LeaseError::CombinatoricsBudget { .. } => SlStatus::CombinatoricsBudget,
        LeaseError::QuadratureNonConvergence(_) => SlStatus::QuadratureNonConvergence,
        LeaseError::UnboundedHorizon => SlStatus::UnboundedHorizon,
        LeaseError::NotHomogeneous(_) => SlStatus::NotHomogeneous,
        LeaseError::Sampling(_) => SlStatus::Sampling,
    }
}

enum Failure {
    Null(&'static str),
    Lease(LeaseError),
}

impl From<LeaseError> for Failure {
    fn from(e: LeaseError) -> Self {
        Failure::Lease(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            SlStatus::NullPointer
        }
        Ok(Err(Failure::Lease(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SlStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers promise `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers promise `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and the caller promises `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn params(o: &SlOperator) -> Result<OperatorParams, LeaseError> {
    let cap = if o.max_lease == 0 {
        LeaseCap::Unbounded
    } else {
        LeaseCap::Finite(o.max_lease)
    };
    OperatorParams::new(o.mu, o.sigma, o.a, o.rho, o.mer, cap)
}

fn horizon(h: u64) -> Option<u64> {
    (h > 0).then_some(h)
}

fn write_result(dst: &mut SlSolveResult, r: &SolveResult) {
    *dst = SlSolveResult {
        t_star: r.t_star,
        u_perceived: r.u_perceived,
        u_true: r.u_true,
        n_perceived: r.entrants_perceived.len(),
        n_true: r.entrants_true.len(),
        eval_count: r.eval_count,
    };
}

/// Builds a market of `n` operators competing for `channels` channels.
/// `estimates` may be null for complete information. On success `*out_market` owns
/// a handle to release with `sl_market_free`.
///
/// # Safety
/// `truth` (and `estimates` when non-null) must point to `n` operators and
/// `out_market` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_market_new(
    channels: usize,
    n: usize,
    truth: *const SlOperator,
    estimates: *const SlOperator,
    out_market: *mut *mut SlMarket,
) -> SlStatus {
    guard(|| {
        let dst = out(out_market, "out_market")?;
        *dst = ptr::null_mut();
        let t: Vec<OperatorParams> = slice(truth, n, "truth")?.iter().map(params).collect::<Result<_, _>>()?;
        let e = if estimates.is_null() {
            t.clone()
        } else {
            slice(estimates, n, "estimates")?
                .iter()
                .map(params)
                .collect::<Result<_, _>>()?
        };
        let market = Market::new(channels, t, e)?;
        *dst = Box::into_raw(Box::new(SlMarket {
            market,
            quad: QuadratureConfig::default(),
        }));
        Ok(())
    })
}

/// Releases a handle from `sl_market_new`. Null is ignored.
///
/// # Safety
/// `market` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_market_free(market: *mut SlMarket) {
    if !market.is_null() {
        // SAFETY: the handle came from Box::into_raw in sl_market_new.
        drop(unsafe { Box::from_raw(market) });
    }
}

/// Number of operators in the market, or 0 for a null handle.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_market_len(market: *const SlMarket) -> usize {
    // SAFETY: see function contract.
    unsafe { market.as_ref() }.map_or(0, |m| m.market.len())
}

/// Sets the Gauss–Hermite starting node count used by later calls.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_market_set_quadrature_nodes(market: *mut SlMarket, nodes: usize) -> SlStatus {
    guard(|| {
        let m = out(market, "market")?;
        let q = QuadratureConfig { nodes, ..m.quad };
        q.validate()?;
        m.quad = q;
        Ok(())
    })
}

fn solve_with(
    market: *const SlMarket,
    result: *mut SlSolveResult,
    f: impl FnOnce(&RevenueModel<'_>) -> spectrum_lease::Result<SolveResult>,
) -> SlStatus {
    guard(|| {
        let m = non_null(market, "market")?;
        let dst = out(result, "result")?;
        let model = RevenueModel::new(&m.market, m.quad)?;
        write_result(dst, &f(&model)?);
        Ok(())
    })
}

/// Interval-sweep solver. `horizon` replaces unbounded caps; 0 means none.
///
/// # Safety
/// `market` must be a live handle and `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_solve_sweep(
    market: *const SlMarket,
    horizon_cap: u64,
    result: *mut SlSolveResult,
) -> SlStatus {
    solve_with(market, result, |m| solve_sweep(m, horizon(horizon_cap)))
}

/// Exhaustive scan over every lease duration up to the largest estimated cap.
///
/// # Safety
/// `market` must be a live handle and `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_brute_force(
    market: *const SlMarket,
    horizon_cap: u64,
    result: *mut SlSolveResult,
) -> SlStatus {
    solve_with(market, result, |m| brute_force(m, horizon(horizon_cap)))
}

/// Baseline restricted to durations at which every operator enters.
///
/// # Safety
/// `market` must be a live handle and `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_solve_subop(
    market: *const SlMarket,
    horizon_cap: u64,
    result: *mut SlSolveResult,
) -> SlStatus {
    solve_with(market, result, |m| solve_subop(m, horizon(horizon_cap)))
}

/// Closed-form solver; the market must be homogeneous with complete
/// information.
///
/// # Safety
/// `market` must be a live handle and `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_solve_homogeneous(market: *const SlMarket, result: *mut SlSolveResult) -> SlStatus {
    guard(|| {
        let m = non_null(market, "market")?;
        let dst = out(result, "result")?;
        if !(m.market.is_homogeneous() && m.market.is_complete_info()) {
            return Err(LeaseError::NotHomogeneous("identical operators with complete information").into());
        }
        let beta = compute_beta_table(m.market.len(), m.market.channels(), &m.quad)?;
        write_result(
            dst,
            &solve_homogeneous(&m.market.true_params()[0], m.market.len(), &beta)?,
        );
        Ok(())
    })
}

/// Expected epoch revenue of operator `k` when `set` (zero-based indices)
/// enters at lease duration `t`.
///
/// # Safety
/// `market` must be a live handle, `set` must point to `set_len` indices and
/// `revenue` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_revenue(
    market: *const SlMarket,
    view: SlView,
    self_index: usize,
    set: *const usize,
    set_len: usize,
    k: usize,
    t: u64,
    revenue: *mut f64,
) -> SlStatus {
    guard(|| {
        let m = non_null(market, "market")?;
        let dst = out(revenue, "revenue")?;
        let entrants = EntrantSet::new(slice(set, set_len, "set")?.iter().copied())?;
        let model = RevenueModel::new(&m.market, m.quad)?;
        let v = match view {
            SlView::True => RevenueView::True,
            SlView::SelfView => RevenueView::SelfView(self_index),
            SlView::Regulator => RevenueView::Regulator,
        };
        *dst = model.revenue(v, &entrants, k, t)?;
        Ok(())
    })
}

fn list_entrants(
    market: *const SlMarket,
    t: u64,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
    f: impl FnOnce(&RevenueModel<'_>, u64) -> spectrum_lease::Result<EntrantSet>,
) -> SlStatus {
    guard(|| {
        let m = non_null(market, "market")?;
        let n_out = out(len, "len")?;
        let model = RevenueModel::new(&m.market, m.quad)?;
        let set = f(&model, t)?;
        *n_out = set.len();
        if cap > 0 {
            if buf.is_null() {
                return Err(Failure::Null("buf"));
            }
            for (i, k) in set.iter().take(cap).enumerate() {
                // SAFETY: the caller promises `cap` writable elements.
                unsafe { *buf.add(i) = k };
            }
        }
        Ok(())
    })
}

/// Entrants the regulator predicts at `t`. Writes up to `cap` zero-based
/// indices into `buf` and the full count into `*len`.
///
/// # Safety
/// `market` must be a live handle, `buf` valid for `cap` writes (may be null
/// when `cap == 0`) and `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_perceived_entrants(
    market: *const SlMarket,
    t: u64,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> SlStatus {
    list_entrants(market, t, buf, cap, len, |m, t| m.perceived_entrants(t))
}

/// Entrants of the operators' own equilibrium at `t`; same buffer contract as
/// `sl_perceived_entrants`.
///
/// # Safety
/// As for `sl_perceived_entrants`.
#[no_mangle]
pub unsafe extern "C" fn sl_equilibrium_entrants(
    market: *const SlMarket,
    t: u64,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> SlStatus {
    list_entrants(market, t, buf, cap, len, |m, t| m.equilibrium_entrants(t))
}

/// Mean and standard deviation of one operator's revenue summed over `t`
/// slots.
///
/// # Safety
/// `op` must be valid for reads and `mean`, `std_dev` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sl_epoch_stats(op: *const SlOperator, t: u64, mean: *mut f64, std_dev: *mut f64) -> SlStatus {
    guard(|| {
        let p = params(non_null(op, "op")?)?;
        if t == 0 {
            return Err(LeaseError::InvalidParameter {
                field: "T",
                reason: "must be >= 1".into(),
            }
            .into());
        }
        let s = epoch_stats(&p, t);
        *out(mean, "mean")? = s.mean;
        *out(std_dev, "std_dev")? = s.std;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                // SAFETY: len > 0 so one byte is writable.
                unsafe { *buf = 0 };
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: n + 1 <= len bytes are writable.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
