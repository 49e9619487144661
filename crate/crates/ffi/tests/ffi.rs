use bts_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn diagonal() -> *mut BtsTensor {
    let mut entries = [0.0f64; 8];
    entries[0] = 1.0;
    entries[7] = 2.0;
    let mut t = ptr::null_mut();
    let status = unsafe { bts_tensor_from_doubles(3, entries.as_ptr(), 8, ptr::null(), 0, &mut t) };
    assert_eq!(status, BtsStatus::Ok);
    t
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bts_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_diagonal_through_handles() {
    let t = diagonal();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bts_solve(t, 7, &mut s) }, BtsStatus::Ok);
    assert_eq!(unsafe { bts_spectrum_len(s) }, 6);
    let mut got = Vec::new();
    for i in 0..6 {
        let (mut re, mut im, mut res) = (0.0, 0.0, 0.0);
        assert_eq!(unsafe { bts_spectrum_sigma_sq(s, i, &mut re, &mut im, &mut res) }, BtsStatus::Ok);
        assert!(im.abs() < 1e-12 && res < 1e-9);
        got.push(re);
    }
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip([0.8, 0.8, 0.8, 0.8, 1.0, 4.0]) {
        assert!((a - b).abs() < 1e-10);
    }
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(
        unsafe { bts_spectrum_sigma_sq(s, 6, &mut re, &mut im, ptr::null_mut()) },
        BtsStatus::OutOfRange
    );
    assert!(last_error().contains("index 6"));
    unsafe {
        bts_spectrum_free(s);
        bts_tensor_free(t);
    }
}

#[test]
fn product_and_invariants() {
    let t = diagonal();
    let mut r = BtsProductReport::default();
    assert_eq!(unsafe { bts_verify_product(t, 1, &mut r) }, BtsStatus::Ok);
    assert!((r.rhs - 1024.0 / 625.0).abs() < 1e-12 && r.rel_error < 1e-10);
    let mut inv = BtsInvariants::default();
    assert_eq!(unsafe { bts_invariants_222(t, &mut inv) }, BtsStatus::Ok);
    assert_eq!(inv.theta, [5.0; 4]);
    assert_eq!((inv.phi, inv.det), (-7.0, 4.0));
    unsafe { bts_tensor_free(t) };
}

#[test]
fn json_and_partitions() {
    let json = CString::new(r#"{"d": 3, "mu": [3], "entries": {"000": "1", "111": "1"}}"#).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { bts_tensor_from_json(json.as_ptr(), &mut t) }, BtsStatus::Ok);
    assert_eq!(unsafe { bts_tensor_order(t) }, 3);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bts_solve(t, 0, &mut s) }, BtsStatus::Ok);
    assert_eq!(unsafe { bts_spectrum_len(s) }, 3);
    unsafe {
        bts_spectrum_free(s);
        bts_tensor_free(t);
    }

    let mu = [2usize, 1];
    let mut n = 0u64;
    assert_eq!(unsafe { bts_ed_degree(mu.as_ptr(), 2, &mut n) }, BtsStatus::Ok);
    assert_eq!(n, 4);
}

#[test]
fn errors_are_codes_not_crashes() {
    let mut t = ptr::null_mut();
    let bad = CString::new("{\"d\": 3, \"entries\": {\"000\": }").unwrap();
    assert_eq!(unsafe { bts_tensor_from_json(bad.as_ptr(), &mut t) }, BtsStatus::Parse);
    assert!(t.is_null());
    assert!(last_error().contains("line 1"));

    let entries = [1.0, 2.0, 3.0, 4.0];
    let mu = [2usize];
    assert_eq!(
        unsafe { bts_tensor_from_doubles(2, entries.as_ptr(), 4, mu.as_ptr(), 1, &mut t) },
        BtsStatus::NotSymmetric
    );
    assert_eq!(
        unsafe { bts_tensor_from_doubles(3, entries.as_ptr(), 4, ptr::null(), 0, &mut t) },
        BtsStatus::InvalidInput
    );
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bts_solve(ptr::null(), 0, &mut s) }, BtsStatus::NullPointer);
    assert_eq!(unsafe { bts_spectrum_len(ptr::null()) }, 0);
    unsafe {
        bts_tensor_free(ptr::null_mut());
        bts_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/bts.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["bts_solve", "bts_tensor_free", "BTS_STATUS_OK", "BtsTensor"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", header]).output() else {
        eprintln!("cc not available; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
