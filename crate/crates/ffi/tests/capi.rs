use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mdl_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = mdl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    mdl_string_free(p);
    s
}

#[test]
fn open_system_round_trip() {
    unsafe {
        let mut sys = ptr::null_mut();
        let st = mdl_system_new(c("open").as_ptr(), 3, 1, c("1/2").as_ptr(), c("1/3").as_ptr(), &mut sys);
        assert_eq!(st, MdlStatus::Ok);
        let mut n = 0usize;
        assert_eq!(mdl_system_state_count(sys, &mut n), MdlStatus::Ok);
        assert_eq!(n, 81);

        let mut pass = false;
        let mut res = ptr::null_mut();
        assert_eq!(mdl_system_check_duality(sys, &mut pass, &mut res), MdlStatus::Ok);
        assert!(pass);
        assert_eq!(take_string(res), "0");

        let mut value = ptr::null_mut();
        let st = mdl_system_duality(sys, c("-1 -1 1 1").as_ptr(), c("1 -1 0 1").as_ptr(), &mut value);
        assert_eq!(st, MdlStatus::Ok);
        let exact = take_string(value);
        let mut f = 0.0;
        mdl_system_duality_f64(sys, c("-1 -1 1 1").as_ptr(), c("1 -1 0 1").as_ptr(), &mut f);
        let (num, den) = exact.split_once('/').unwrap_or((&exact, "1"));
        let expected = num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap();
        assert!((f - expected).abs() <= 1e-12 * expected.abs());

        mdl_system_free(sys);
    }
}

#[test]
fn simulate_is_seeded() {
    unsafe {
        let mut sys = ptr::null_mut();
        assert_eq!(mdl_system_new(c("braided").as_ptr(), 2, 2, c("1/2").as_ptr(), ptr::null(), &mut sys), MdlStatus::Ok);
        let mut a = MdlEstimate::default();
        let mut b = MdlEstimate::default();
        for out in [&mut a, &mut b] {
            let st = mdl_system_simulate(sys, c("2,1").as_ptr(), c("1,1").as_ptr(), 0.5, 4000, 9, out);
            assert_eq!(st, MdlStatus::Ok);
        }
        assert_eq!(a, b);
        assert!(a.z < 4.0);
        mdl_system_free(sys);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut sys = ptr::null_mut();
        let st = mdl_system_new(c("tasep").as_ptr(), 3, 1, c("1/2").as_ptr(), ptr::null(), &mut sys);
        assert_eq!(st, MdlStatus::Parse);
        assert!(last_error().contains("tasep"));
        assert!(sys.is_null());

        let st = mdl_system_new(c("open").as_ptr(), 3, 2, c("1/2").as_ptr(), ptr::null(), &mut sys);
        assert_eq!(st, MdlStatus::Unsupported);

        let st = mdl_system_new(ptr::null(), 3, 1, c("1/2").as_ptr(), ptr::null(), &mut sys);
        assert_eq!(st, MdlStatus::NullPointer);

        let mut n = 0usize;
        assert_eq!(mdl_system_state_count(ptr::null(), &mut n), MdlStatus::NullPointer);

        assert_eq!(mdl_system_new(c("msasep").as_ptr(), 3, 2, c("1/2").as_ptr(), ptr::null(), &mut sys), MdlStatus::Ok);
        assert!(mdl_last_error().is_null());
        let mut v = ptr::null_mut();
        let st = mdl_system_duality(sys, c("1 2").as_ptr(), c("0 0 1").as_ptr(), &mut v);
        assert_ne!(st, MdlStatus::Ok);
        assert!(v.is_null());
        mdl_system_free(sys);
        mdl_system_free(ptr::null_mut());
        mdl_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_suite_json() {
    unsafe {
        let mut pass = false;
        let mut out = ptr::null_mut();
        assert_eq!(mdl_verify_suite_json(c("appendix").as_ptr(), &mut pass, &mut out), MdlStatus::Ok);
        assert!(pass);
        let doc: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert!(doc.as_array().unwrap().iter().all(|r| r["pass"] == true));
        assert_eq!(mdl_verify_suite_json(c("everything").as_ptr(), ptr::null_mut(), &mut out), MdlStatus::Parse);
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "mdl.h"

int main(void) {
    MdlSystem *sys = NULL;
    if (mdl_system_new("braided", 2, 2, "1/2", NULL, &sys) != MDL_STATUS_OK) return 10;
    size_t n = 0;
    if (mdl_system_state_count(sys, &n) != MDL_STATUS_OK || n != 9) return 11;
    bool pass = false;
    if (mdl_system_check_duality(sys, &pass, NULL) != MDL_STATUS_OK || !pass) return 12;
    char *v = NULL;
    if (mdl_system_duality(sys, "2,1", "1,1", &v) != MDL_STATUS_OK) return 13;
    printf("%s\n", v);
    mdl_string_free(v);
    mdl_system_free(sys);
    if (mdl_system_new("nope", 2, 2, "1/2", NULL, &sys) != MDL_STATUS_PARSE) return 14;
    if (mdl_last_error() == NULL || strstr(mdl_last_error(), "nope") == NULL) return 15;
    return 0;
}
"#;

#[test]
fn header_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libmdl_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = work.join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut sys = ptr::null_mut();
    let mut v = ptr::null_mut();
    let expected = unsafe {
        mdl_system_new(c("braided").as_ptr(), 2, 2, c("1/2").as_ptr(), ptr::null(), &mut sys);
        mdl_system_duality(sys, c("2,1").as_ptr(), c("1,1").as_ptr(), &mut v);
        mdl_system_free(sys);
        take_string(v)
    };
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), expected);
}
