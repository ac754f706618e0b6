//! C ABI over the patent paragraph highlighter: load a trained model,
//! classify text, and fetch highlight/explanation JSON.
//!
//! Conventions:
//! - models are opaque handles created by [`phlt_model_load`] and released
//!   with [`phlt_model_free`];
//! - every fallible call returns a [`PhltStatus`]; on failure a
//!   thread-local message is readable via [`phlt_last_error_message`];
//! - strings returned through out-pointers are UTF-8, NUL-terminated, and
//!   owned by the caller, who must release them with [`phlt_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::Path;

use libc::{c_char, c_int};

use phlt::cli::{annotate_content, explain_text, AppConfig, CliError, HighlightOutput};
use phlt::models::{AnyModel, ModelError};

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhltStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The file could not be read or written.
    Io = 3,
    /// The model file is damaged or not a model file.
    CorruptModel = 4,
    /// The model file was written by a newer library version.
    VersionMismatch = 5,
    /// Any other failure; see `phlt_last_error_message`.
    Failed = 6,
}

/// Opaque trained-model handle.
pub struct PhltModel {
    inner: AnyModel,
    config: AppConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn model_error_status(e: &ModelError) -> PhltStatus {
    set_error(&e.to_string());
    match e {
        ModelError::VersionMismatch { .. } => PhltStatus::VersionMismatch,
        ModelError::CorruptFile { .. } => PhltStatus::CorruptModel,
        ModelError::Io { .. } => PhltStatus::Io,
        _ => PhltStatus::Failed,
    }
}

fn cli_error_status(e: &CliError) -> PhltStatus {
    set_error(&e.to_string());
    PhltStatus::Failed
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, PhltStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(PhltStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_error(&format!("invalid UTF-8 argument: {e}"));
        PhltStatus::InvalidUtf8
    })
}

fn return_string(out: *mut *mut c_char, value: String) -> PhltStatus {
    let sanitized: String = value.chars().filter(|&c| c != '\0').collect();
    match CString::new(sanitized) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            PhltStatus::Ok
        }
        Err(e) => {
            set_error(&format!("string conversion: {e}"));
            PhltStatus::Failed
        }
    }
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn phlt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn phlt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load a model file written by the `phlt train` command.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
/// On `Ok` the caller owns the handle and must release it with
/// [`phlt_model_free`].
#[no_mangle]
pub unsafe extern "C" fn phlt_model_load(
    path: *const c_char,
    out: *mut *mut PhltModel,
) -> PhltStatus {
    if out.is_null() {
        set_error("null out pointer");
        return PhltStatus::NullArgument;
    }
    *out = std::ptr::null_mut();
    let path = match utf8_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match AnyModel::load(Path::new(path)) {
        Ok(inner) => {
            let handle = Box::new(PhltModel {
                inner,
                config: AppConfig::default(),
            });
            *out = Box::into_raw(handle);
            PhltStatus::Ok
        }
        Err(e) => model_error_status(&e),
    }
}

/// Release a model handle. Passing null is a no-op.
///
/// # Safety
/// `model` must be a handle from [`phlt_model_load`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn phlt_model_free(model: *mut PhltModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes the model distinguishes; 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn phlt_model_num_classes(model: *const PhltModel) -> c_int {
    if model.is_null() {
        return 0;
    }
    (*model).inner.classes().len() as c_int
}

/// Model kind ("mnb", "logreg", "svm", "nbsvm", "forest"); free the string
/// with [`phlt_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phlt_model_kind(
    model: *const PhltModel,
    out: *mut *mut c_char,
) -> PhltStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return PhltStatus::NullArgument;
    }
    return_string(out, (*model).inner.kind().to_string())
}

/// Classify one text. `out_label` receives the predicted label. When
/// `out_scores` is non-null, up to `scores_capacity` per-class decision
/// scores are written in class order; `out_n_scores`, when non-null,
/// receives the class count.
///
/// # Safety
/// Pointers must be valid; `out_scores`, when non-null, must point at at
/// least `scores_capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn phlt_predict(
    model: *const PhltModel,
    text: *const c_char,
    out_label: *mut c_int,
    out_scores: *mut f64,
    scores_capacity: usize,
    out_n_scores: *mut usize,
) -> PhltStatus {
    if model.is_null() || out_label.is_null() {
        set_error("null pointer argument");
        return PhltStatus::NullArgument;
    }
    let text = match utf8_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match (*model).inner.predict_text(text) {
        Ok((label, scores)) => {
            *out_label = label as c_int;
            if !out_n_scores.is_null() {
                *out_n_scores = scores.len();
            }
            if !out_scores.is_null() {
                for (i, s) in scores.iter().take(scores_capacity).enumerate() {
                    *out_scores.add(i) = *s;
                }
            }
            PhltStatus::Ok
        }
        Err(e) => model_error_status(&e),
    }
}

/// Split `text` into paragraphs (blank-line separated; grant XML is
/// detected and split on its `<p>` elements), classify each, and return the
/// highlight JSON document. `sentences` non-zero switches to sentence
/// units. Free the result with [`phlt_string_free`].
///
/// # Safety
/// `model` must be a live handle; `text` a valid NUL-terminated string;
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn phlt_highlight_json(
    model: *const PhltModel,
    text: *const c_char,
    sentences: c_int,
    out: *mut *mut c_char,
) -> PhltStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return PhltStatus::NullArgument;
    }
    let text = match utf8_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let handle = &*model;
    match annotate_content(&handle.inner, text, sentences != 0) {
        Ok(paragraphs) => {
            let output = HighlightOutput {
                classes: handle.inner.classes().to_vec(),
                paragraphs,
            };
            match serde_json::to_string_pretty(&output) {
                Ok(json) => return_string(out, json),
                Err(e) => {
                    set_error(&format!("serialization: {e}"));
                    PhltStatus::Failed
                }
            }
        }
        Err(e) => cli_error_status(&e),
    }
}

/// Top-k token attributions for `text` as a JSON document. `surrogate`
/// non-zero uses the perturbation surrogate (required for forest models).
/// Free the result with [`phlt_string_free`].
///
/// # Safety
/// As for [`phlt_highlight_json`].
#[no_mangle]
pub unsafe extern "C" fn phlt_explain_json(
    model: *const PhltModel,
    text: *const c_char,
    top_k: usize,
    surrogate: c_int,
    out: *mut *mut c_char,
) -> PhltStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return PhltStatus::NullArgument;
    }
    let text = match utf8_arg(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let handle = &*model;
    match explain_text(&handle.inner, text, top_k, surrogate != 0, &handle.config) {
        Ok(explanation) => match serde_json::to_string_pretty(&explanation) {
            Ok(json) => return_string(out, json),
            Err(e) => {
                set_error(&format!("serialization: {e}"));
                PhltStatus::Failed
            }
        },
        Err(e) => cli_error_status(&e),
    }
}

/// Release a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter of
/// this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phlt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
