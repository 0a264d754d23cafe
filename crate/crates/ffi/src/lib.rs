//! C ABI over the workbench core: opaque system handles, status codes, and
//! JSON strings for structured results.
//!
//! Conventions:
//! - Every function returning `MemsysStatus` reports failure details through
//!   [`memsys_last_error`], whose buffer is valid until the next call on the
//!   same thread.
//! - Strings returned through out-parameters are heap-allocated and must be
//!   released with [`memsys_string_free`].
//! - Handles must be released with [`memsys_system_free`]; all functions
//!   tolerate null handles and return `MEMSYS_STATUS_NULL_ARGUMENT`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use memsys::emergence::{check_emergence, EmergenceBudgets, FairnessMode};
use memsys::logic::check::{model_check, CheckMode};
use memsys::logic::eval::LogicModel;
use memsys::logic::parse::{parse_formula, NameContext};
use memsys::system::MemorySystem;

/// Opaque handle to a loaded memory system.
pub struct MemsysSystem {
    inner: MemorySystem,
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemsysStatus {
    MemsysStatusOk = 0,
    MemsysStatusNullArgument = 1,
    MemsysStatusInvalidUtf8 = 2,
    MemsysStatusParseError = 3,
    MemsysStatusSemanticError = 4,
    MemsysStatusBudgetExceeded = 5,
}

use MemsysStatus::*;

/// Fairness selector for `memsys_check_emergence`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemsysFairness {
    MemsysFairnessEntry = 0,
    MemsysFairnessNeighbourhood = 1,
    MemsysFairnessSpanAgents = 2,
}

/// History-quantification selector for `memsys_model_check`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemsysMode {
    MemsysModeAllMaximal = 0,
    MemsysModeSpanningOnly = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let sanitized = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message describing the most recent failure on this thread. Never null;
/// the buffer is invalidated by the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn memsys_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn memsys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, MemsysStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(MemsysStatusNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        MemsysStatusInvalidUtf8
    })
}

fn emit_string(out: *mut *mut c_char, value: serde_json::Value) -> MemsysStatus {
    if out.is_null() {
        set_error("null output argument");
        return MemsysStatusNullArgument;
    }
    let text = value.to_string().replace('\0', " ");
    match CString::new(text) {
        Ok(cs) => {
            unsafe { *out = cs.into_raw() };
            MemsysStatusOk
        }
        Err(e) => {
            set_error(format!("string conversion failed: {e}"));
            MemsysStatusSemanticError
        }
    }
}

/// Parses a system from its JSON file representation.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle.
#[no_mangle]
pub unsafe extern "C" fn memsys_system_from_json(
    json: *const c_char,
    out: *mut *mut MemsysSystem,
) -> MemsysStatus {
    if out.is_null() {
        set_error("null output argument");
        return MemsysStatusNullArgument;
    }
    *out = ptr::null_mut();
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match memsys::loader::from_str(text) {
        Ok(sys) => {
            *out = Box::into_raw(Box::new(MemsysSystem { inner: sys }));
            MemsysStatusOk
        }
        Err(e @ memsys::loader::LoadError::Json(_)) => {
            set_error(e);
            MemsysStatusParseError
        }
        Err(e) => {
            set_error(e);
            MemsysStatusSemanticError
        }
    }
}

/// Releases a system handle. Null is a no-op.
///
/// # Safety
/// `sys` must be a handle from `memsys_system_from_json`, released at most
/// once.
#[no_mangle]
pub unsafe extern "C" fn memsys_system_free(sys: *mut MemsysSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn memsys_system_agent_count(sys: *const MemsysSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.agent_count())
}

/// Well-formedness report as JSON: `{valid, violations, warnings}`.
///
/// # Safety
/// `sys` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn memsys_system_validate(
    sys: *const MemsysSystem,
    out_json: *mut *mut c_char,
) -> MemsysStatus {
    let Some(sys) = sys.as_ref() else {
        set_error("null system handle");
        return MemsysStatusNullArgument;
    };
    let report = sys.inner.validate();
    emit_string(
        out_json,
        serde_json::json!({
            "valid": report.is_valid(),
            "violations": report.violations,
            "warnings": report.warnings,
        }),
    )
}

/// Exact emergence decision; result JSON mirrors the CLI:
/// `{supports, signal, classes}`.
///
/// # Safety
/// `sys` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn memsys_check_emergence(
    sys: *const MemsysSystem,
    fairness: MemsysFairness,
    node_budget: usize,
    out_json: *mut *mut c_char,
) -> MemsysStatus {
    let Some(sys) = sys.as_ref() else {
        set_error("null system handle");
        return MemsysStatusNullArgument;
    };
    let mode = match fairness {
        MemsysFairness::MemsysFairnessEntry => FairnessMode::Entry,
        MemsysFairness::MemsysFairnessNeighbourhood => FairnessMode::Neighbourhood,
        MemsysFairness::MemsysFairnessSpanAgents => FairnessMode::SpanAgents,
    };
    let budgets = EmergenceBudgets {
        node_budget,
        ..EmergenceBudgets::default()
    };
    match check_emergence(&sys.inner, mode, budgets) {
        Ok(v) => {
            let mut signals: Vec<&str> = v
                .classes
                .iter()
                .filter_map(|c| c.stable_signal.map(|g| sys.inner.signals[g].as_str()))
                .collect();
            signals.sort_unstable();
            signals.dedup();
            let signal = match (v.supports, signals.as_slice()) {
                (true, [s]) => Some(s.to_string()),
                _ => None,
            };
            emit_string(
                out_json,
                serde_json::json!({
                    "supports": v.supports,
                    "signal": signal,
                    "classes": v.classes.len(),
                }),
            )
        }
        Err(e) => {
            set_error(e);
            MemsysStatusBudgetExceeded
        }
    }
}

/// Model-checks one sentence; result JSON: `{holds}`.
///
/// # Safety
/// `sys` must be a live handle; `formula` a valid NUL-terminated string;
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn memsys_model_check(
    sys: *const MemsysSystem,
    formula: *const c_char,
    mode: MemsysMode,
    node_budget: usize,
    out_json: *mut *mut c_char,
) -> MemsysStatus {
    let Some(sys) = sys.as_ref() else {
        set_error("null system handle");
        return MemsysStatusNullArgument;
    };
    let text = match read_utf8(formula) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let ctx = NameContext::of(&sys.inner);
    let phi = match parse_formula(text, Some(&ctx)) {
        Ok(phi) => phi,
        Err(e) => {
            set_error(e);
            return MemsysStatusParseError;
        }
    };
    let model = LogicModel::new(&sys.inner);
    let check_mode = match mode {
        MemsysMode::MemsysModeAllMaximal => CheckMode::AllMaximal,
        MemsysMode::MemsysModeSpanningOnly => CheckMode::SpanningOnly,
    };
    match model_check(&model, &phi, check_mode, node_budget) {
        Ok(v) => emit_string(out_json, serde_json::json!({ "holds": v.holds })),
        Err(e) => {
            set_error(e);
            MemsysStatusSemanticError
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn load(json: &str) -> *mut MemsysSystem {
        let mut out = ptr::null_mut();
        let status = unsafe { memsys_system_from_json(c(json).as_ptr(), &mut out) };
        assert_eq!(status, MemsysStatusOk, "{}", last_error());
        out
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(memsys_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    fn take_string(ptr: *mut c_char) -> String {
        let s = unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned();
        unsafe { memsys_string_free(ptr) };
        s
    }

    fn maj1_json() -> String {
        memsys::loader::to_string_pretty(&memsys::fixtures::maj1())
    }

    #[test]
    fn round_trip_and_agent_count() {
        let sys = load(&maj1_json());
        assert_eq!(unsafe { memsys_system_agent_count(sys) }, 3);
        unsafe { memsys_system_free(sys) };
    }

    #[test]
    fn parse_error_status() {
        let mut out = ptr::null_mut();
        let status = unsafe { memsys_system_from_json(c("{ not json").as_ptr(), &mut out) };
        assert_eq!(status, MemsysStatusParseError);
        assert!(out.is_null());
        assert!(last_error().contains("json"));
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut out = ptr::null_mut();
        assert_eq!(
            unsafe { memsys_system_from_json(ptr::null(), &mut out) },
            MemsysStatusNullArgument
        );
        assert_eq!(unsafe { memsys_system_agent_count(ptr::null()) }, 0);
        let mut json = ptr::null_mut();
        assert_eq!(
            unsafe { memsys_system_validate(ptr::null(), &mut json) },
            MemsysStatusNullArgument
        );
    }

    #[test]
    fn emergence_verdict_json() {
        let sys = load(&maj1_json());
        let mut out = ptr::null_mut();
        let status = unsafe {
            memsys_check_emergence(
                sys,
                MemsysFairness::MemsysFairnessEntry,
                100_000,
                &mut out,
            )
        };
        assert_eq!(status, MemsysStatusOk, "{}", last_error());
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["supports"], true);
        assert_eq!(v["signal"], "g");
        unsafe { memsys_system_free(sys) };
    }

    #[test]
    fn model_check_verdicts() {
        let sys = load(&maj1_json());
        for (formula, expected) in [("<> [] forall x. g@x", true), ("stable(b)", false)] {
            let mut out = ptr::null_mut();
            let status = unsafe {
                memsys_model_check(
                    sys,
                    c(formula).as_ptr(),
                    MemsysMode::MemsysModeAllMaximal,
                    100_000,
                    &mut out,
                )
            };
            assert_eq!(status, MemsysStatusOk, "{}", last_error());
            let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
            assert_eq!(v["holds"], expected, "{formula}");
        }
        let mut out = ptr::null_mut();
        let status = unsafe {
            memsys_model_check(
                sys,
                c("(((").as_ptr(),
                MemsysMode::MemsysModeAllMaximal,
                100_000,
                &mut out,
            )
        };
        assert_eq!(status, MemsysStatusParseError);
        unsafe { memsys_system_free(sys) };
    }

    #[test]
    fn validate_report_json() {
        let sys = load(&maj1_json());
        let mut out = ptr::null_mut();
        assert_eq!(
            unsafe { memsys_system_validate(sys, &mut out) },
            MemsysStatusOk
        );
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["valid"], true);
        unsafe { memsys_system_free(sys) };
    }
}
