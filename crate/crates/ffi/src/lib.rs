// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over the slicing driver. Handles are opaque; every call returns a
//! `SymsliceStatus` and leaves a message for `symslice_last_error` on
//! failure. Strings handed out must be released with `symslice_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use symslice::driver::{analyze_plan, extract_spec, plan_slices, AnalyzeOptions, DriverError, SlicePlan};
use symslice::frontend::{parse_unit, Language, SourceUnit};
use symslice::oracle::{HoareSpec, HttpOracle, MockOracle, Oracle, OracleConfig, OracleError};
use symslice::render::{default_tokenizer, Tokenizer};

/// Result of every fallible call. Analysis errors each get their own code.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymsliceStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    UnknownLanguage = 3,
    Parse = 4,
    NoPostCondition = 5,
    Annotation = 6,
    UnknownFunction = 7,
    Render = 8,
    Oracle = 9,
    MissingCredential = 10,
    Config = 11,
    Panic = 12,
}

/// A parsed source file plus analysis options.
pub struct SymsliceSession {
    unit: SourceUnit,
    opts: AnalyzeOptions,
    tokenizer: Box<dyn Tokenizer>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(SymsliceStatus, String);

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        let status = match &e {
            DriverError::NoPostCondition => SymsliceStatus::NoPostCondition,
            DriverError::Annotation(_) => SymsliceStatus::Annotation,
            DriverError::UnknownFunction(_) => SymsliceStatus::UnknownFunction,
            DriverError::Render(_) => SymsliceStatus::Render,
            DriverError::Oracle(OracleError::MissingCredential(_)) => SymsliceStatus::MissingCredential,
            DriverError::Oracle(OracleError::Config(_)) => SymsliceStatus::Config,
            DriverError::Oracle(_) => SymsliceStatus::Oracle,
        };
        Failure(status, e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        DriverError::from(e).into()
    }
}

/// Runs `body`, turning errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SymsliceStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SymsliceStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SymsliceStatus::Panic
        }
    }
}

/// Reads a required C string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SymsliceStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(SymsliceStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Reads an optional C string; NULL means absent.
unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn live<'a>(s: *const SymsliceSession) -> Result<&'a SymsliceSession, Failure> {
    s.as_ref().ok_or_else(|| Failure(SymsliceStatus::NullArgument, "session is NULL".into()))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(SymsliceStatus::Panic, "output holds a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SymsliceStatus::NullArgument, "output pointer is NULL".into()));
    }
    Ok(())
}

/// Parses `source` written in `language` (`mini`, `python` or `c`).
///
/// # Safety
/// `source` and `language` must be NUL-terminated strings; `out` must be
/// writable. The handle goes back through `symslice_session_free`.
#[no_mangle]
pub unsafe extern "C" fn symslice_session_new(
    source: *const c_char,
    language: *const c_char,
    out: *mut *mut SymsliceSession,
) -> SymsliceStatus {
    guard(|| {
        check_out(out)?;
        *out = ptr::null_mut();
        let src = text(source, "source")?;
        let lang = Language::from_tag(text(language, "language")?).map_err(|e| Failure(SymsliceStatus::UnknownLanguage, e.to_string()))?;
        let unit = parse_unit(src.as_bytes(), lang, 0).map_err(|e| Failure(SymsliceStatus::Parse, e.to_string()))?;
        let s = SymsliceSession { unit, opts: AnalyzeOptions::default(), tokenizer: default_tokenizer() };
        *out = Box::into_raw(Box::new(s));
        Ok(())
    })
}

/// # Safety
/// `session` must come from `symslice_session_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn symslice_session_free(session: *mut SymsliceSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Selects the function to analyse; NULL restores the default (the last one).
///
/// # Safety
/// `session` must be a live handle; `name` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn symslice_session_set_function(session: *mut SymsliceSession, name: *const c_char) -> SymsliceStatus {
    guard(|| {
        let name = opt_text(name, "name")?.map(str::to_string);
        let s = session.as_mut().ok_or_else(|| Failure(SymsliceStatus::NullArgument, "session is NULL".into()))?;
        s.opts.function = name;
        Ok(())
    })
}

/// Caps partition enumeration.
///
/// # Safety
/// `session` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn symslice_session_set_max_partitions(session: *mut SymsliceSession, max: usize) -> SymsliceStatus {
    guard(|| {
        let s = session.as_mut().ok_or_else(|| Failure(SymsliceStatus::NullArgument, "session is NULL".into()))?;
        s.opts.limits.max_partitions = max;
        Ok(())
    })
}

unsafe fn spec_and_plan(s: &SymsliceSession, pre: *const c_char, post: *const c_char) -> Result<(HoareSpec, SlicePlan), Failure> {
    let spec = extract_spec(&s.unit, opt_text(pre, "pre")?, opt_text(post, "post")?, None)?;
    let plan = plan_slices(&s.unit, &spec, s.tokenizer.as_ref(), &s.opts)?;
    Ok((spec, plan))
}

/// Writes the slices in query order as JSON, each with its text.
/// `pre` and `post` may be NULL to use the markers in the source.
///
/// # Safety
/// Pointers as for the other calls; `*out_json` is freed with
/// `symslice_string_free`.
#[no_mangle]
pub unsafe extern "C" fn symslice_plan_json(
    session: *const SymsliceSession,
    pre: *const c_char,
    post: *const c_char,
    out_json: *mut *mut c_char,
) -> SymsliceStatus {
    guard(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let s = live(session)?;
        let (_, plan) = spec_and_plan(s, pre, post)?;
        let mut v = serde_json::to_value(&plan).map_err(|e| Failure(SymsliceStatus::Panic, e.to_string()))?;
        for (item, planned) in v["slices"].as_array_mut().into_iter().flatten().zip(&plan.slices) {
            item["text"] = planned.rendered.text.clone().into();
            item["token_count"] = planned.rendered.token_count.into();
            item["stmt_count"] = planned.rendered.stmt_count.into();
        }
        give_string(out_json, v.to_string())
    })
}

unsafe fn run_analysis(
    s: &SymsliceSession,
    pre: *const c_char,
    post: *const c_char,
    oracle: &dyn Oracle,
    label: &str,
    parallelism: usize,
    out_json: *mut *mut c_char,
) -> Result<(), Failure> {
    let (spec, plan) = spec_and_plan(s, pre, post)?;
    let opts = AnalyzeOptions { parallelism, ..s.opts.clone() };
    let report = analyze_plan(&plan, &spec, oracle, label, s.tokenizer.name(), &opts)?;
    give_string(out_json, report.to_json())
}

/// Analyses with a scripted oracle: `script_json` maps slice fingerprints
/// to `PASS`, `FAIL` or `ERROR`. Writes the JSON report.
///
/// # Safety
/// As for `symslice_plan_json`.
#[no_mangle]
pub unsafe extern "C" fn symslice_analyze_mock(
    session: *const SymsliceSession,
    pre: *const c_char,
    post: *const c_char,
    script_json: *const c_char,
    out_json: *mut *mut c_char,
) -> SymsliceStatus {
    guard(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let s = live(session)?;
        let oracle = MockOracle::from_json(text(script_json, "script")?)?;
        run_analysis(s, pre, post, &oracle, "mock", 1, out_json)
    })
}

/// Analyses against a chat-completions endpoint. `config_json` holds oracle
/// settings (NULL for defaults); the key is read from the environment
/// variable it names.
///
/// # Safety
/// As for `symslice_plan_json`.
#[no_mangle]
pub unsafe extern "C" fn symslice_analyze(
    session: *const SymsliceSession,
    pre: *const c_char,
    post: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> SymsliceStatus {
    guard(|| {
        check_out(out_json)?;
        *out_json = ptr::null_mut();
        let s = live(session)?;
        let config: OracleConfig = match opt_text(config_json, "config")? {
            Some(t) => serde_json::from_str(t).map_err(|e| Failure(SymsliceStatus::Config, e.to_string()))?,
            None => OracleConfig::default(),
        };
        let label = format!("{} @ {}", config.model, config.endpoint);
        let parallelism = config.parallelism.max(1);
        let oracle = HttpOracle::new(config)?;
        run_analysis(s, pre, post, &oracle, &label, parallelism, out_json)
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn symslice_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn symslice_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn symslice_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
