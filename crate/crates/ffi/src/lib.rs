//! C interface.
//!
//! Every function returns a [`ClearqStatus`]; results go through out
//! pointers. On failure `clearq_last_error` gives a message for the calling
//! thread. Strings handed out by the library must be released with
//! `clearq_string_free`, handles with their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clearq_core::equilibrium::EquilibriumReport;
use clearq_core::spectral::stationary_for;
use clearq_core::unobservable::critical_values;
use clearq_core::{
    net_benefit_ao, Analysis, CaseLabel, Env, Error, ModelParams, RewardCost, Strategy, Tolerances,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClearqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    UnreachableState = 3,
    Unsupported = 4,
    Numerical = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClearqCase {
    A = 0,
    B = 1,
    C = 2,
}

/// Opaque model handle.
pub struct ClearqModel {
    analysis: Analysis,
}

/// Opaque equilibrium report handle.
pub struct ClearqReport {
    report: EquilibriumReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClearqStatus {
    match e {
        Error::NonPositiveRate { .. }
        | Error::NonPositiveRewardCost { .. }
        | Error::InvalidStrategy(_)
        | Error::InvalidSimulation(_) => ClearqStatus::InvalidInput,
        Error::UnreachableState { .. } => ClearqStatus::UnreachableState,
        Error::UnsupportedStrategy(_) => ClearqStatus::Unsupported,
        Error::ScanLimitExceeded { .. }
        | Error::NoInteriorRoot { .. }
        | Error::SingularSystem
        | Error::InconsistentMass { .. } => ClearqStatus::Numerical,
    }
}

fn fail(status: ClearqStatus, msg: impl Into<String>) -> ClearqStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> ClearqStatus) -> ClearqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ClearqStatus::Panic, "internal panic"),
    }
}

fn from_core<T>(r: clearq_core::Result<T>) -> Result<T, ClearqStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn parse_strategy(s: *const c_char) -> Result<Strategy, ClearqStatus> {
    if s.is_null() {
        return Err(fail(ClearqStatus::NullPointer, "strategy is null"));
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(ClearqStatus::InvalidInput, "strategy is not UTF-8"))?;
    text.parse::<Strategy>()
        .map_err(|e| fail(ClearqStatus::InvalidInput, e.to_string()))
}

fn hand_out(s: String, out: *mut *mut c_char) -> ClearqStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` is non-null.
            unsafe { *out = c.into_raw() };
            ClearqStatus::Ok
        }
        Err(_) => fail(ClearqStatus::Numerical, "string contains NUL"),
    }
}

/// Message for the most recent failure on this thread, or NULL. Valid
/// until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn clearq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a model from rates and the reward/cost pair.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn clearq_model_new(
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
    q12: f64,
    q21: f64,
    reward: f64,
    cost: f64,
    out: *mut *mut ClearqModel,
) -> ClearqStatus {
    guard(|| {
        if out.is_null() {
            return fail(ClearqStatus::NullPointer, "out is null");
        }
        let params = ModelParams::new([lambda1, lambda2], [mu1, mu2], q12, q21);
        let rc = RewardCost { reward, cost };
        match from_core(Analysis::new(&params, &rc)) {
            Ok(analysis) => {
                *out = Box::into_raw(Box::new(ClearqModel { analysis }));
                ClearqStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// # Safety
/// `model` must come from `clearq_model_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn clearq_model_free(model: *mut ClearqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_case(model: *const ClearqModel, out: *mut ClearqCase) -> ClearqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        let label = clearq_core::congestion_case(&(*model).analysis.model).label;
        *out = match label {
            CaseLabel::CaseA => ClearqCase::A,
            CaseLabel::CaseB => ClearqCase::B,
            CaseLabel::CaseC => ClearqCase::C,
        };
        ClearqStatus::Ok
    })
}

/// Critical values `V_fu`, `V_au^min`, `V_au^max`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_critical_values(
    model: *const ClearqModel,
    v_fu: *mut f64,
    v_au_min: *mut f64,
    v_au_max: *mut f64,
) -> ClearqStatus {
    guard(|| {
        if model.is_null() || v_fu.is_null() || v_au_min.is_null() || v_au_max.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        let cv = critical_values(&(*model).analysis.model);
        *v_fu = cv.v_fu;
        *v_au_min = cv.v_au_min;
        *v_au_max = cv.v_au_max;
        ClearqStatus::Ok
    })
}

/// Stationary mass `p(n, env)` under a strategy descriptor; `env` is 1 or 2.
///
/// # Safety
/// `strategy` must be a NUL-terminated string; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_stationary_mass(
    model: *const ClearqModel,
    strategy: *const c_char,
    n: u64,
    env: u32,
    out: *mut f64,
) -> ClearqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        let Some(e) = env.checked_sub(1).and_then(|i| Env::from_index(i as usize)) else {
            return fail(ClearqStatus::OutOfRange, format!("environment {env} is not 1 or 2"));
        };
        let s = match parse_strategy(strategy) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let a = &(*model).analysis;
        let dist = match from_core(stationary_for(&a.model, &a.spectral, &s)) {
            Ok(d) => d,
            Err(st) => return st,
        };
        match from_core(dist.try_mass(n, e)) {
            Ok(v) => {
                *out = v;
                ClearqStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// Net benefit of joining after seeing `n` customers, when everybody else
/// follows `strategy`.
///
/// # Safety
/// `strategy` must be a NUL-terminated string; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_net_benefit(
    model: *const ClearqModel,
    strategy: *const c_char,
    n: u64,
    out: *mut f64,
) -> ClearqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        let s = match parse_strategy(strategy) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let a = &(*model).analysis;
        match from_core(net_benefit_ao(&a.model, &a.coefficients, &s, n)) {
            Ok(v) => {
                *out = v.value;
                ClearqStatus::Ok
            }
            Err(st) => st,
        }
    })
}

/// Equilibria of the almost observable case. With `verify` non-zero each
/// equilibrium is also checked against the balance-equation oracle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_equilibria(
    model: *const ClearqModel,
    verify: i32,
    out: *mut *mut ClearqReport,
) -> ClearqStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        let a = &(*model).analysis;
        let mut report = match from_core(a.equilibria(&Tolerances::default())) {
            Ok(r) => r,
            Err(st) => return st,
        };
        if verify != 0 {
            if let Err(st) = from_core(report.attach_verification(&a.model, &a.reward_cost)) {
                return st;
            }
        }
        *out = Box::into_raw(Box::new(ClearqReport { report }));
        ClearqStatus::Ok
    })
}

/// # Safety
/// `report` must come from `clearq_equilibria` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn clearq_report_free(report: *mut ClearqReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_report_count(
    report: *const ClearqReport,
    out: *mut usize,
) -> ClearqStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        *out = (*report).report.equilibria.len();
        ClearqStatus::Ok
    })
}

/// Strategy descriptor of equilibrium `index`. Free with
/// `clearq_string_free`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_report_descriptor(
    report: *const ClearqReport,
    index: usize,
    out: *mut *mut c_char,
) -> ClearqStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        match (&(*report).report.equilibria).get(index) {
            Some(e) => hand_out(e.label(), out),
            None => fail(ClearqStatus::OutOfRange, format!("no equilibrium at index {index}")),
        }
    })
}

/// Whole report as JSON. Free with `clearq_string_free`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn clearq_report_json(
    report: *const ClearqReport,
    out: *mut *mut c_char,
) -> ClearqStatus {
    guard(|| {
        if report.is_null() || out.is_null() {
            return fail(ClearqStatus::NullPointer, "null argument");
        }
        match serde_json::to_string(&(*report).report) {
            Ok(s) => hand_out(s, out),
            Err(e) => fail(ClearqStatus::Numerical, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn clearq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
