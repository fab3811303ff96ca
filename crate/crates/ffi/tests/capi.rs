// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use symslice_ffi::*;

const BRANCH: &str = "if (x > y) {\n  z := x + 2\n} else {\n  z := x * y\n}\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn session(src: &str, lang: &str) -> *mut SymsliceSession {
    let mut s = ptr::null_mut();
    let status = unsafe { symslice_session_new(c(src).as_ptr(), c(lang).as_ptr(), &mut s) };
    assert_eq!(status, SymsliceStatus::Ok);
    assert!(!s.is_null());
    s
}

/// Takes ownership of a library string.
fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { symslice_string_free(p) };
    s
}

fn last_error() -> String {
    let p = symslice_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn plan(s: *const SymsliceSession, post: &str) -> serde_json::Value {
    let mut out = ptr::null_mut();
    let status = unsafe { symslice_plan_json(s, ptr::null(), c(post).as_ptr(), &mut out) };
    assert_eq!(status, SymsliceStatus::Ok);
    serde_json::from_str(&take(out)).unwrap()
}

#[test]
fn plan_lists_slices_with_text() {
    let s = session(BRANCH, "mini");
    let v = plan(s, "z > y");
    let slices = v["slices"].as_array().unwrap();
    assert_eq!(slices.len(), 2);
    let texts: Vec<&str> = slices.iter().map(|x| x["text"].as_str().unwrap()).collect();
    assert!(texts.contains(&"assume(!(x > y))\nz := x * y\n"));
    assert!(slices[0]["token_count"].as_u64() <= slices[1]["token_count"].as_u64());
    unsafe { symslice_session_free(s) };
}

#[test]
fn mock_analysis_returns_a_report() {
    let s = session(BRANCH, "mini");
    let v = plan(s, "z > y");
    let mut script = serde_json::Map::new();
    for x in v["slices"].as_array().unwrap() {
        let verdict = if x["text"].as_str().unwrap().contains("x * y") { "FAIL" } else { "PASS" };
        script.insert(x["fingerprint"].as_str().unwrap().to_string(), verdict.into());
    }
    let script = c(&serde_json::Value::Object(script).to_string());
    let mut out = ptr::null_mut();
    let status = unsafe { symslice_analyze_mock(s, ptr::null(), c("z > y").as_ptr(), script.as_ptr(), &mut out) };
    assert_eq!(status, SymsliceStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(report["verdict"]["kind"], "COUNTEREXAMPLE");
    assert_eq!(report["counterexample"]["text"], "assume(!(x > y))\nz := x * y\n");
    unsafe { symslice_session_free(s) };
}

#[test]
fn errors_have_distinct_codes() {
    let mut s = ptr::null_mut();
    let st = unsafe { symslice_session_new(c("x := 1").as_ptr(), c("cobol").as_ptr(), &mut s) };
    assert_eq!(st, SymsliceStatus::UnknownLanguage);
    assert!(s.is_null());
    assert!(last_error().contains("cobol"));

    let st = unsafe { symslice_session_new(ptr::null(), c("mini").as_ptr(), &mut s) };
    assert_eq!(st, SymsliceStatus::NullArgument);

    let bad = [0xffu8, 0];
    let st = unsafe { symslice_session_new(bad.as_ptr().cast(), c("mini").as_ptr(), &mut s) };
    assert_eq!(st, SymsliceStatus::InvalidUtf8);

    let s = session(BRANCH, "mini");
    let mut out = ptr::null_mut();
    let st = unsafe { symslice_plan_json(s, ptr::null(), ptr::null(), &mut out) };
    assert_eq!(st, SymsliceStatus::NoPostCondition);
    assert!(out.is_null());
    assert!(last_error().contains("no post-condition"));

    let st = unsafe { symslice_session_set_function(s, c("missing").as_ptr()) };
    assert_eq!(st, SymsliceStatus::Ok);
    let st = unsafe { symslice_plan_json(s, ptr::null(), c("z > y").as_ptr(), &mut out) };
    assert_eq!(st, SymsliceStatus::UnknownFunction);
    unsafe { symslice_session_set_function(s, ptr::null()) };

    let st = unsafe { symslice_analyze_mock(s, ptr::null(), c("z > y").as_ptr(), c("{}").as_ptr(), &mut out) };
    assert_eq!(st, SymsliceStatus::Oracle);

    let cfg = c(r#"{"api_key_env": "SYMSLICE_FFI_TEST_UNSET"}"#);
    let st = unsafe { symslice_analyze(s, ptr::null(), c("z > y").as_ptr(), cfg.as_ptr(), &mut out) };
    assert_eq!(st, SymsliceStatus::MissingCredential);

    let st = unsafe { symslice_analyze(s, ptr::null(), c("z > y").as_ptr(), c("{\"bogus\": 1}").as_ptr(), &mut out) };
    assert_eq!(st, SymsliceStatus::Config);

    let st = unsafe { symslice_plan_json(s, ptr::null(), c("z > y").as_ptr(), ptr::null_mut()) };
    assert_eq!(st, SymsliceStatus::NullArgument);
    unsafe { symslice_session_free(s) };
    unsafe { symslice_session_free(ptr::null_mut()) };
    unsafe { symslice_string_free(ptr::null_mut()) };
}

#[test]
fn partition_cap_is_applied() {
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/kvserver.c")).unwrap();
    let s = session(&src, "c");
    let st = unsafe { symslice_session_set_max_partitions(s, 5) };
    assert_eq!(st, SymsliceStatus::Ok);
    let v = plan(s, "db->key != NULL");
    assert_eq!(v["partitions"], 5);
    assert_eq!(v["partitions_truncated"], true);
    unsafe { symslice_session_free(s) };
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(symslice_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/symslice.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "symslice_session_new",
        "symslice_session_free",
        "symslice_session_set_function",
        "symslice_session_set_max_partitions",
        "symslice_plan_json",
        "symslice_analyze_mock",
        "symslice_analyze",
        "symslice_string_free",
        "symslice_last_error",
        "symslice_version",
        "SYMSLICE_STATUS_NO_POST_CONDITION = 5",
        "typedef struct SymsliceSession SymsliceSession;",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("use.c");
    std::fs::write(
        &prog,
        "#include \"symslice.h\"\nint main(void) {\n  SymsliceSession *s = 0;\n  SymsliceStatus st = symslice_session_new(\"x := 1\", \"mini\", &s);\n  symslice_session_free(s);\n  return st == SYMSLICE_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&prog)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()).ok_or(())
}
