//! C ABI over the stochastic approximation laboratory.
//!
//! Handles are opaque; every fallible call returns a [`SalabStatus`] and
//! leaves a human-readable message retrievable via [`salab_last_error`]
//! (thread-local, valid until the next failing call on the same thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use salab::config::{parse_config, ConfigError, RunConfig};
use salab::runner::{execute, RunError};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SalabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was not valid UTF-8 or otherwise malformed.
    InvalidArgument = 2,
    /// The config document is not valid JSON.
    ConfigParse = 3,
    /// The config contains a key the schema does not know.
    ConfigUnknownField = 4,
    /// A config value failed validation.
    ConfigValidation = 5,
    /// The run aborted inside the engine.
    Engine = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("error message had NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn salab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Opaque parsed-and-validated run configuration.
pub struct SalabConfig {
    inner: RunConfig,
}

/// Opaque result of a finished run: the summary plus the full trace.
pub struct SalabSummary {
    summary_json: CString,
    trace_csv: CString,
    final_theta: Vec<f64>,
    truncation_count: u64,
}

fn config_status(err: &ConfigError) -> SalabStatus {
    match err {
        ConfigError::Parse(_) => SalabStatus::ConfigParse,
        ConfigError::UnknownField { .. } => SalabStatus::ConfigUnknownField,
        ConfigError::Validation { .. } => SalabStatus::ConfigValidation,
    }
}

/// Parse a JSON config. On success writes a handle to `out`; free it with
/// [`salab_config_free`].
///
/// # Safety
/// `json` must point to a NUL-terminated string and `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn salab_config_parse(
    json: *const c_char,
    out: *mut *mut SalabConfig,
) -> SalabStatus {
    if json.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SalabStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config is not valid UTF-8");
            return SalabStatus::InvalidArgument;
        }
    };
    match parse_config(text) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(SalabConfig { inner: cfg }));
            SalabStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            config_status(&e)
        }
    }
}

/// Override the seed of a parsed config.
///
/// # Safety
/// `cfg` must be a handle returned by [`salab_config_parse`].
#[no_mangle]
pub unsafe extern "C" fn salab_config_set_seed(cfg: *mut SalabConfig, seed: u64) -> SalabStatus {
    let Some(cfg) = cfg.as_mut() else {
        set_error("null config handle");
        return SalabStatus::NullPointer;
    };
    cfg.inner.seed = seed;
    SalabStatus::Ok
}

/// # Safety
/// `cfg` must be a handle returned by [`salab_config_parse`], or null.
#[no_mangle]
pub unsafe extern "C" fn salab_config_free(cfg: *mut SalabConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run the experiment described by `cfg`. On success writes a summary handle
/// to `out`; free it with [`salab_summary_free`].
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn salab_run(
    cfg: *const SalabConfig,
    out: *mut *mut SalabSummary,
) -> SalabStatus {
    let Some(cfg) = cfg.as_ref() else {
        set_error("null config handle");
        return SalabStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output pointer");
        return SalabStatus::NullPointer;
    }
    match execute(&cfg.inner) {
        Ok(run) => {
            let json = serde_json::to_string_pretty(&run.summary).expect("summary serializes");
            let handle = SalabSummary {
                summary_json: CString::new(json).expect("no NUL in JSON"),
                trace_csv: CString::new(run.trace.to_csv()).expect("no NUL in CSV"),
                final_theta: run.summary.final_theta.clone(),
                truncation_count: run.summary.truncation_count as u64,
            };
            *out = Box::into_raw(Box::new(handle));
            SalabStatus::Ok
        }
        Err(RunError::Config(e)) => {
            set_error(e.to_string());
            config_status(&e)
        }
        Err(e) => {
            set_error(e.to_string());
            SalabStatus::Engine
        }
    }
}

/// Pretty-printed summary JSON; owned by the handle.
///
/// # Safety
/// `s` must be a live summary handle.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_json(s: *const SalabSummary) -> *const c_char {
    s.as_ref().map_or(ptr::null(), |s| s.summary_json.as_ptr())
}

/// Full trace in CSV form; owned by the handle.
///
/// # Safety
/// `s` must be a live summary handle.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_trace_csv(s: *const SalabSummary) -> *const c_char {
    s.as_ref().map_or(ptr::null(), |s| s.trace_csv.as_ptr())
}

/// Number of truncation events, or 0 for a null handle.
///
/// # Safety
/// `s` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_truncations(s: *const SalabSummary) -> u64 {
    s.as_ref().map_or(0, |s| s.truncation_count)
}

/// Dimension of the final iterate, or 0 for a null handle.
///
/// # Safety
/// `s` must be a live summary handle or null.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_theta_dim(s: *const SalabSummary) -> usize {
    s.as_ref().map_or(0, |s| s.final_theta.len())
}

/// Copy the final iterate into `buf` (capacity `len`); returns the number of
/// coordinates written.
///
/// # Safety
/// `s` must be a live summary handle; `buf` must point to at least `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_final_theta(
    s: *const SalabSummary,
    buf: *mut f64,
    len: usize,
) -> usize {
    let Some(s) = s.as_ref() else { return 0 };
    if buf.is_null() {
        return 0;
    }
    let n = s.final_theta.len().min(len);
    ptr::copy_nonoverlapping(s.final_theta.as_ptr(), buf, n);
    n
}

/// # Safety
/// `s` must be a handle returned by [`salab_run`], or null.
#[no_mangle]
pub unsafe extern "C" fn salab_summary_free(s: *mut SalabSummary) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
