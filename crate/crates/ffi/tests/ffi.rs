use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use serde_json::Value;
use urykit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a library string.
unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    uk_string_free(p);
    s
}

unsafe fn last_error() -> String {
    let p = uk_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_str().unwrap().to_string()
}

const TWO: &str = r#"{"points":["p","q"],"dist":[["0","2"],["2","0"]]}"#;

unsafe fn two_points() -> *mut UkSpace {
    let mut space = ptr::null_mut();
    assert_eq!(uk_space_from_json(c(TWO).as_ptr(), &mut space), UkStatus::Ok);
    space
}

#[test]
fn space_round_trip_and_realize() {
    unsafe {
        let space = two_points();
        let mut n = 0;
        assert_eq!(uk_space_len(space, &mut n), UkStatus::Ok);
        assert_eq!(n, 2);

        let mut z = 0;
        let map = c(r#"{"domain":["p"],"values":["1"]}"#);
        assert_eq!(uk_space_realize(space, map.as_ptr(), &mut z), UkStatus::Ok);
        assert_eq!(z, 2);
        let mut d = ptr::null_mut();
        assert_eq!(uk_space_distance(space, z, 1, &mut d), UkStatus::Ok);
        assert_eq!(take(d), "3");

        let mut json = ptr::null_mut();
        assert_eq!(uk_space_to_json(space, &mut json), UkStatus::Ok);
        let v: Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 3);
        assert_eq!(v["provenance"][2]["kind"], "realized");
        uk_space_free(space);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut space = ptr::null_mut();
        let asym = c(r#"{"points":["p","q"],"dist":[["0","2"],["1","0"]]}"#);
        assert_eq!(uk_space_from_json(asym.as_ptr(), &mut space), UkStatus::Parse);
        assert!(space.is_null());
        assert!(!last_error().is_empty());

        let tri = c(r#"{"points":["a","b","c"],"dist":[["0","1","5"],["1","0","1"],["5","1","0"]]}"#);
        assert_eq!(uk_space_from_json(tri.as_ptr(), &mut space), UkStatus::Invalid);
        assert_eq!(uk_space_from_json(ptr::null(), &mut space), UkStatus::NullArgument);

        let space = two_points();
        assert!(uk_last_error().is_null());
        let mut d = ptr::null_mut();
        assert_eq!(uk_space_distance(space, 0, 9, &mut d), UkStatus::Invalid);
        let bad = c(r#"{"domain":["p","q"],"values":["1/2","1/2"]}"#);
        let mut z = 0;
        assert_eq!(uk_space_realize(space, bad.as_ptr(), &mut z), UkStatus::Invalid);
        uk_space_free(space);
        uk_space_free(ptr::null_mut());
        uk_string_free(ptr::null_mut());
    }
}

#[test]
fn stabilize_from_a_space() {
    unsafe {
        let mut space = ptr::null_mut();
        let json = c(r#"{"points":["a1","a2","b1"],"dist":[["0","2","2"],["2","0","2"],["2","2","0"]]}"#);
        assert_eq!(uk_space_from_json(json.as_ptr(), &mut space), UkStatus::Ok);
        let phi = c(r#"{"domain":["a1","a2"],"range":["a2","a1"]}"#);
        let mut out = ptr::null_mut();
        let status = uk_stabilize(
            space,
            c("a1,a2").as_ptr(),
            c("b1").as_ptr(),
            phi.as_ptr(),
            c("1/100").as_ptr(),
            10_000,
            &mut out,
        );
        assert_eq!(status, UkStatus::Ok);
        let trace: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(trace["within_epsilon"], true);
        let mut n = 0;
        uk_space_len(space, &mut n);
        assert_eq!(n, 3);

        let status = uk_stabilize(
            space,
            c("a1,a2").as_ptr(),
            c("b1").as_ptr(),
            phi.as_ptr(),
            c("1/0").as_ptr(),
            10_000,
            &mut out,
        );
        assert_eq!(status, UkStatus::Parse);
        uk_space_free(space);
    }
}

#[test]
fn forced_flat_instance_is_invalid() {
    unsafe {
        let mut space = ptr::null_mut();
        let json = c(r#"{"points":["a0","a1","a2","b2","c2"],"dist":[
            ["0","2","1","1","1"],["2","0","3","1","3"],["1","3","0","2","2"],
            ["1","1","2","0","2"],["1","3","2","2","0"]]}"#);
        assert_eq!(uk_space_from_json(json.as_ptr(), &mut space), UkStatus::Ok);
        let phi = c(r#"{"domain":["a0","a1","a2"],"range":["a0","a1","c2"]}"#);
        let mut out = ptr::null_mut();
        let status = uk_stabilize(
            space,
            c("a0,a1,a2").as_ptr(),
            c("a0,a1,b2").as_ptr(),
            phi.as_ptr(),
            c("1/100").as_ptr(),
            10_000,
            &mut out,
        );
        assert_eq!(status, UkStatus::Invalid);
        assert!(out.is_null());
        assert!(last_error().contains("flat"));
        uk_space_free(space);
    }
}

#[test]
fn random_stabilize_and_suites() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            uk_stabilize_random(3, c("1/100").as_ptr(), 1, &mut out),
            UkStatus::Failed
        );
        let trace: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(trace["converged"], false);
        assert_eq!(uk_stabilize_random(3, c("0").as_ptr(), 10, &mut out), UkStatus::Invalid);

        assert_eq!(uk_run_suite(c("katetov").as_ptr(), 1, 10, &mut out), UkStatus::Ok);
        let report: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(report["passed"], true);
        assert_eq!(uk_run_suite(c("bogus").as_ptr(), 1, 10, &mut out), UkStatus::Invalid);
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/urykit.h");
    assert!(header.exists(), "header not generated");
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("liburykit_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping link", lib.display());
        return;
    }
    let exe = profile_dir.join("urykit_c_smoke");
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
