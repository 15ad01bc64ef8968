//! C ABI for the ranklabel engine.
//!
//! Datasets and labels cross the boundary as opaque handles. Every fallible
//! function returns an [`RlStatus`]; on failure a message is kept per thread
//! and can be read with [`rl_last_error_message`]. Strings handed out by the
//! library must be released with [`rl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ranklabel::fairness::{binomial_cdf, fair_min_table};
use ranklabel::{render_html, render_json, Dataset, Error, NutritionalLabel, RankingRequest};

/// Result codes. Zero means success.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    RL_OK = 0,
    RL_NULL_ARGUMENT = 1,
    RL_INVALID_UTF8 = 2,
    RL_INVALID_DATASET = 3,
    RL_INVALID_REQUEST = 4,
    RL_UNKNOWN_ATTRIBUTE = 5,
    RL_TYPE_MISMATCH = 6,
    RL_INSUFFICIENT_DATA = 7,
    RL_INVALID_ARGUMENT = 8,
    RL_BUFFER_TOO_SMALL = 9,
    RL_INTERNAL = 10,
}

/// Parsed dataset.
pub struct RlDataset(Dataset);

/// Computed nutritional label.
pub struct RlLabel(NutritionalLabel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> RlStatus {
    match err.root() {
        Error::InvalidDataset(_) | Error::MalformedRow { .. } | Error::EmptyColumn(_) => {
            RlStatus::RL_INVALID_DATASET
        }
        Error::UnknownAttribute(_) => RlStatus::RL_UNKNOWN_ATTRIBUTE,
        Error::TypeMismatch { .. } | Error::NonBinaryAttribute { .. } => RlStatus::RL_TYPE_MISMATCH,
        Error::AllRowsDropped
        | Error::InsufficientData(_)
        | Error::EmptyGroup { .. }
        | Error::UndefinedCorrelation => RlStatus::RL_INSUFFICIENT_DATA,
        Error::InvalidSpec(_) | Error::Json(_) => RlStatus::RL_INVALID_REQUEST,
        Error::InvalidArgument(_) | Error::DegeneratePopulation(_) => RlStatus::RL_INVALID_ARGUMENT,
        _ => RlStatus::RL_INTERNAL,
    }
}

fn fail(err: Error) -> RlStatus {
    set_error(format!("{}: {err}", err.code()));
    status_of(&err)
}

// Runs `f`, turning panics into RL_INTERNAL so they never unwind into C.
fn guard(f: impl FnOnce() -> RlStatus) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            RlStatus::RL_INTERNAL
        }
    }
}

fn null_arg(name: &str) -> RlStatus {
    set_error(format!("null argument: {name}"));
    RlStatus::RL_NULL_ARGUMENT
}

fn emit_string(bytes: Vec<u8>, out: *mut *mut c_char) -> RlStatus {
    match CString::new(bytes) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            RlStatus::RL_OK
        }
        Err(_) => {
            set_error("output contains an interior NUL byte");
            RlStatus::RL_INTERNAL
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses `len` bytes of CSV into a new dataset handle.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_dataset_load_csv(
    data: *const u8,
    len: usize,
    out: *mut *mut RlDataset,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if data.is_null() && len > 0 {
            return null_arg("data");
        }
        let bytes = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        match Dataset::load_csv(bytes) {
            Ok(ds) => {
                *out = Box::into_raw(Box::new(RlDataset(ds)));
                RlStatus::RL_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of data rows, or 0 for NULL.
///
/// # Safety
/// `dataset` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_dataset_row_count(dataset: *const RlDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.row_count())
}

/// # Safety
/// `dataset` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_dataset_free(dataset: *mut RlDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Ranks `dataset` according to a JSON request and builds its label.
///
/// The request object has `weights` (attribute to weight), `sensitive_attribute`,
/// and optional `normalization`, `diversity_attributes`, `k`, `alpha`, `p`.
///
/// # Safety
/// `dataset` must be a live handle, `request_json` a NUL-terminated string
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_label_build(
    dataset: *const RlDataset,
    request_json: *const c_char,
    out: *mut *mut RlLabel,
) -> RlStatus {
    guard(|| {
        let Some(ds) = dataset.as_ref() else {
            return null_arg("dataset");
        };
        if request_json.is_null() {
            return null_arg("request_json");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let Ok(text) = CStr::from_ptr(request_json).to_str() else {
            set_error("request is not valid UTF-8");
            return RlStatus::RL_INVALID_UTF8;
        };
        let request: RankingRequest = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => return fail(e.into()),
        };
        match request.evaluate(&ds.0) {
            Ok((_, label)) => {
                *out = Box::into_raw(Box::new(RlLabel(label)));
                RlStatus::RL_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Canonical JSON of a label. Free the result with [`rl_string_free`].
///
/// # Safety
/// `label` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_label_to_json(label: *const RlLabel, out: *mut *mut c_char) -> RlStatus {
    guard(|| match (label.as_ref(), out.is_null()) {
        (None, _) => null_arg("label"),
        (_, true) => null_arg("out"),
        (Some(l), false) => emit_string(render_json(&l.0), out),
    })
}

/// Self-contained HTML rendering of a label. Free the result with
/// [`rl_string_free`].
///
/// # Safety
/// `label` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_label_to_html(label: *const RlLabel, out: *mut *mut c_char) -> RlStatus {
    guard(|| match (label.as_ref(), out.is_null()) {
        (None, _) => null_arg("label"),
        (_, true) => null_arg("out"),
        (Some(l), false) => emit_string(render_html(&l.0), out),
    })
}

/// # Safety
/// `label` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_label_free(label: *mut RlLabel) {
    if !label.is_null() {
        drop(Box::from_raw(label));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// P(X <= t) for X ~ Binomial(n, p).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rl_binomial_cdf(t: usize, n: usize, p: f64, out: *mut f64) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match binomial_cdf(t, n, p) {
            Ok(v) => {
                *out = v;
                RlStatus::RL_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the minimum protected count for each prefix 1..=k into `out`,
/// which must hold at least `k` entries.
///
/// # Safety
/// `out` must point to `out_len` writable `size_t` values.
#[no_mangle]
pub unsafe extern "C" fn rl_fair_min_table(
    k: usize,
    p: f64,
    alpha: f64,
    out: *mut usize,
    out_len: usize,
) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if out_len < k {
            set_error(format!("buffer holds {out_len} entries, {k} needed"));
            return RlStatus::RL_BUFFER_TOO_SMALL;
        }
        match fair_min_table(k, p, alpha) {
            Ok(table) => {
                std::slice::from_raw_parts_mut(out, k).copy_from_slice(&table);
                RlStatus::RL_OK
            }
            Err(e) => fail(e),
        }
    })
}
