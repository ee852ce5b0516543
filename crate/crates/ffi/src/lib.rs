//! C interface to `ruinlab`.
//!
//! Objects are created from JSON and returned as opaque handles that must be
//! released with the matching `*_free`. Every fallible call returns a
//! [`RuinlabStatus`]; on failure [`ruinlab_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ruinlab::arrivals::{simulate, ArrivalModel};
use ruinlab::claims::ClaimDistribution;
use ruinlab::harness::RngStreamPlan;
use ruinlab::ldp::{Ext, RateFunction};
use ruinlab::ruin::{asymptotic_finite, asymptotic_infinite, mc_ruin_finite, mc_ruin_infinite, EstimateReport, RiskConfig};
use ruinlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuinlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    Saturation = 5,
    SimulationBudget = 6,
    Refused = 7,
    Class = 8,
    Numeric = 9,
    Io = 10,
    Panic = 11,
}

pub struct RuinlabClaims(ClaimDistribution);

pub struct RuinlabModel(ArrivalModel);

pub struct RuinlabRisk(RiskConfig);

/// Monte Carlo estimate. `asymptotic` and `ratio` are NaN when not applicable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinlabEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub asymptotic: f64,
    pub ratio: f64,
    /// Horizon actually simulated; the truncation horizon for infinite-horizon runs.
    pub horizon: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl From<EstimateReport> for RuinlabEstimate {
    fn from(r: EstimateReport) -> Self {
        Self {
            estimate: r.estimate,
            std_error: r.std_error,
            ci_low: r.ci95.0,
            ci_high: r.ci95.1,
            asymptotic: r.asymptotic.unwrap_or(f64::NAN),
            ratio: r.ratio.unwrap_or(f64::NAN),
            horizon: r.horizon.unwrap_or(f64::NAN),
            n_paths: r.n_paths,
            seed: r.seed,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RuinlabStatus {
    match e {
        Error::Domain(_) => RuinlabStatus::Domain,
        Error::Saturation(_) => RuinlabStatus::Saturation,
        Error::SimulationBudget { .. } => RuinlabStatus::SimulationBudget,
        Error::Refused(_) => RuinlabStatus::Refused,
        Error::Class(_) => RuinlabStatus::Class,
        Error::Config(_) => RuinlabStatus::Config,
        Error::Numeric(_) => RuinlabStatus::Numeric,
        Error::Io(_) => RuinlabStatus::Io,
    }
}

struct Fail(RuinlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RuinlabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RuinlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RuinlabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RuinlabStatus::Panic
        }
    }
}

unsafe fn json_arg<'a>(json: *const c_char) -> Result<&'a str, Fail> {
    if json.is_null() {
        return Err(null("json"));
    }
    CStr::from_ptr(json).to_str().map_err(|e| Fail(RuinlabStatus::InvalidUtf8, e.to_string()))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Fail> {
    serde_json::from_str(text).map_err(|e| Fail(RuinlabStatus::Config, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

unsafe fn boxed<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

/// Message of the last failed call on this thread. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn ruinlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ruinlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_from_json(json: *const c_char, out: *mut *mut RuinlabClaims) -> RuinlabStatus {
    guard(|| {
        let c: ClaimDistribution = parse(json_arg(json)?)?;
        boxed(out, RuinlabClaims(c))
    })
}

/// # Safety
/// `claims` must be null or a handle from [`ruinlab_claims_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_free(claims: *mut RuinlabClaims) {
    if !claims.is_null() {
        drop(Box::from_raw(claims));
    }
}

/// # Safety
/// `claims` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_mean(claims: *const RuinlabClaims, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(claims, "claims")?.0.mean()))
}

/// `P(C ≥ x)`.
///
/// # Safety
/// `claims` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_tail(claims: *const RuinlabClaims, x: f64, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(claims, "claims")?.0.tail(x)?))
}

/// Integrated tail `B̄₀(x)`.
///
/// # Safety
/// `claims` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_integrated_tail(claims: *const RuinlabClaims, x: f64, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(claims, "claims")?.0.integrated_tail(x)?))
}

/// # Safety
/// `claims` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_claims_mean_excess(claims: *const RuinlabClaims, u: f64, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(claims, "claims")?.0.mean_excess(u)?))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_model_from_json(json: *const c_char, out: *mut *mut RuinlabModel) -> RuinlabStatus {
    guard(|| {
        let m: ArrivalModel = parse(json_arg(json)?)?;
        boxed(out, RuinlabModel(m))
    })
}

/// # Safety
/// `model` must be null or a handle from [`ruinlab_model_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_model_free(model: *mut RuinlabModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_model_mean_rate(model: *const RuinlabModel, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(model, "model")?.0.mean_rate()))
}

/// Rate function at `x`; `+INFINITY` outside the effective domain.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_rate_function(model: *const RuinlabModel, x: f64, out: *mut f64) -> RuinlabStatus {
    guard(|| {
        let v = match RateFunction::for_model(&handle(model, "model")?.0)?.eval(x)? {
            Ext::Finite(v) => v,
            Ext::Infinite => f64::INFINITY,
        };
        put(out, v)
    })
}

/// Number of arrivals in `[0, horizon]` on path `path_index` of `seed`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_simulate_count(
    model: *const RuinlabModel,
    horizon: f64,
    seed: u64,
    path_index: u64,
    out: *mut u64,
) -> RuinlabStatus {
    guard(|| {
        let path = simulate(&handle(model, "model")?.0, horizon, &mut RngStreamPlan::new(seed).stream_for(path_index))?;
        put(out, path.count() as u64)
    })
}

/// Parses a risk configuration (`u`, `p`, `claims`, `arrivals`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_risk_from_json(json: *const c_char, out: *mut *mut RuinlabRisk) -> RuinlabStatus {
    guard(|| {
        let r: RiskConfig = parse(json_arg(json)?)?;
        r.validate()?;
        boxed(out, RuinlabRisk(r))
    })
}

/// # Safety
/// `risk` must be null or a handle from [`ruinlab_risk_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_risk_free(risk: *mut RuinlabRisk) {
    if !risk.is_null() {
        drop(Box::from_raw(risk));
    }
}

/// # Safety
/// `risk` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_risk_rho(risk: *const RuinlabRisk, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, handle(risk, "risk")?.0.rho()))
}

/// `ψ(u)` by simulation to the truncation horizon. `workers = 0` uses every core.
///
/// # Safety
/// `risk` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_ruin_infinite(
    risk: *const RuinlabRisk,
    u: f64,
    n_paths: u64,
    seed: u64,
    workers: usize,
    out: *mut RuinlabEstimate,
) -> RuinlabStatus {
    guard(|| {
        let cfg = handle(risk, "risk")?.0.with_u(u);
        let r = mc_ruin_infinite(&cfg, n_paths, &RngStreamPlan::new(seed), workers)?;
        put(out, r.into())
    })
}

/// `ψ(u, z)`.
///
/// # Safety
/// `risk` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_ruin_finite(
    risk: *const RuinlabRisk,
    u: f64,
    z: f64,
    n_paths: u64,
    seed: u64,
    workers: usize,
    out: *mut RuinlabEstimate,
) -> RuinlabStatus {
    guard(|| {
        let cfg = handle(risk, "risk")?.0.with_u(u);
        let r = mc_ruin_finite(&cfg, z, n_paths, &RngStreamPlan::new(seed), workers)?;
        put(out, r.into())
    })
}

/// `ρ/(1 − ρ)·B̄₀(u)`.
///
/// # Safety
/// `risk` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_asymptotic_infinite(risk: *const RuinlabRisk, u: f64, out: *mut f64) -> RuinlabStatus {
    guard(|| put(out, asymptotic_infinite(&handle(risk, "risk")?.0.with_u(u))?))
}

/// Finite-horizon asymptotic at scaled time `t_scaled`; the horizon `z = e(u)·T` goes to `horizon` if non-null.
///
/// # Safety
/// `risk` must be a live handle; `out` must be writable; `horizon` may be null.
#[no_mangle]
pub unsafe extern "C" fn ruinlab_asymptotic_finite(
    risk: *const RuinlabRisk,
    u: f64,
    t_scaled: f64,
    out: *mut f64,
    horizon: *mut f64,
) -> RuinlabStatus {
    guard(|| {
        let a = asymptotic_finite(&handle(risk, "risk")?.0.with_u(u), t_scaled)?;
        if !horizon.is_null() {
            horizon.write(a.horizon);
        }
        put(out, a.value)
    })
}
