//! C ABI over `bts-core`.
//!
//! Tensors and spectra are opaque heap handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`BtsStatus`]; on
//! failure [`bts_last_error`] holds a message for the calling thread.

use bts_core::combinatorics::{ed_degree_usize, Partition};
use bts_core::invariants::invariants_222;
use bts_core::io::parse_tensor_json;
use bts_core::scalar::{rational_from_f64, rational_to_f64, Rational};
use bts_core::spectral::{solve, verify_product_with, SolveOptions, Spectrum};
use bts_core::tensor_core::{compress, BinaryTensor, MuTensor};
use bts_core::BtsError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BtsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    NotSymmetric = 4,
    Solver = 5,
    Isotropic = 6,
    Degenerate = 7,
    Unsupported = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// A μ-symmetric tensor with exact rational entries.
pub struct BtsTensor {
    inner: MuTensor<Rational>,
}

/// Singular data of one tensor.
pub struct BtsSpectrum {
    inner: Spectrum,
}

/// The 2×2×2 invariants, rounded to double.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BtsInvariants {
    pub theta: [f64; 4],
    pub phi: f64,
    pub det: f64,
    pub f3: [f64; 3],
}

/// Product formula check.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BtsProductReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &BtsError) -> BtsStatus {
    match e {
        BtsError::InvalidInput(_) | BtsError::PartitionMismatch { .. } => BtsStatus::InvalidInput,
        BtsError::Parse(_) => BtsStatus::Parse,
        BtsError::NotSymmetric { .. } => BtsStatus::NotSymmetric,
        BtsError::Isotropic(_) => BtsStatus::Isotropic,
        BtsError::Degenerate(_) => BtsStatus::Degenerate,
        BtsError::Unsupported(_) => BtsStatus::Unsupported,
        BtsError::NoConvergence { .. } | BtsError::GeneralPosition(_) | BtsError::CrossCheck(_) => {
            BtsStatus::Solver
        }
    }
}

/// Runs `f`, converting errors and panics into a status plus the thread-local message.
fn guard(f: impl FnOnce() -> Result<(), (BtsStatus, String)>) -> BtsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BtsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BtsStatus::Panic
        }
    }
}

fn lift(e: BtsError) -> (BtsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (BtsStatus, String) {
    (BtsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_mu(mu: *const usize, mu_len: usize, d: usize) -> Result<Partition, (BtsStatus, String)> {
    if mu.is_null() || mu_len == 0 {
        return Ok(Partition::ones(d));
    }
    let parts = std::slice::from_raw_parts(mu, mu_len).to_vec();
    Partition::new(parts).map_err(lift)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a tensor from 2^d doubles in slot-major bit order. Each double is read
/// exactly. `mu` may be null for μ = 1^d; otherwise the entries must be μ-symmetric.
///
/// # Safety
/// `entries` must point to `len` doubles, `mu` to `mu_len` integers (or be null),
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bts_tensor_from_doubles(
    d: usize,
    entries: *const f64,
    len: usize,
    mu: *const usize,
    mu_len: usize,
    out: *mut *mut BtsTensor,
) -> BtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if entries.is_null() {
            return Err(null("entries"));
        }
        if d == 0 || d > 16 || len != 1usize << d {
            return Err((BtsStatus::InvalidInput, format!("need 2^d entries for d = {d}, got {len}")));
        }
        let vals = std::slice::from_raw_parts(entries, len);
        if vals.iter().any(|v| !v.is_finite()) {
            return Err((BtsStatus::InvalidInput, "non-finite entry".into()));
        }
        let t = BinaryTensor::new(d, vals.iter().map(|&v| rational_from_f64(v)).collect()).map_err(lift)?;
        let mu = read_mu(mu, mu_len, d)?;
        let inner = compress(&t, &mu).map_err(lift)?;
        *out = Box::into_raw(Box::new(BtsTensor { inner }));
        Ok(())
    })
}

/// Parses the JSON tensor format (`{"d": 3, "mu": null, "entries": {"000": "3/4"}}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bts_tensor_from_json(json: *const c_char, out: *mut *mut BtsTensor) -> BtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (BtsStatus::Parse, format!("not UTF-8: {e}")))?;
        let input = parse_tensor_json(text).map_err(lift)?;
        let inner = input.to_mu(None).map_err(lift)?;
        *out = Box::into_raw(Box::new(BtsTensor { inner }));
        Ok(())
    })
}

/// # Safety
/// `t` must come from a `bts_tensor_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bts_tensor_free(t: *mut BtsTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Order d of the tensor.
///
/// # Safety
/// `t` must be a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn bts_tensor_order(t: *const BtsTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.mu().d())
}

/// Solves for all singular data.
///
/// # Safety
/// `t` must be a live tensor handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bts_solve(t: *const BtsTensor, seed: u64, out: *mut *mut BtsSpectrum) -> BtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        let inner = solve(&t.inner, &SolveOptions { seed }).map_err(lift)?;
        *out = Box::into_raw(Box::new(BtsSpectrum { inner }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from `bts_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bts_spectrum_free(s: *mut BtsSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of singular data (the ED degree for non-degenerate input).
///
/// # Safety
/// `s` must be a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn bts_spectrum_len(s: *const BtsSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.inner.data.len())
}

/// σ² of datum `index` as (re, im), plus its residual.
///
/// # Safety
/// `s` must be a live spectrum handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bts_spectrum_sigma_sq(
    s: *const BtsSpectrum,
    index: usize,
    re: *mut f64,
    im: *mut f64,
    residual: *mut f64,
) -> BtsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("spectrum"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let d = s.inner.data.get(index).ok_or_else(|| {
            (BtsStatus::OutOfRange, format!("index {index} of {}", s.inner.data.len()))
        })?;
        *re = d.sigma_sq.re;
        *im = d.sigma_sq.im;
        if !residual.is_null() {
            *residual = d.residual;
        }
        Ok(())
    })
}

/// ∏σ² against the closed-form factor product.
///
/// # Safety
/// `t` must be a live tensor handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bts_verify_product(
    t: *const BtsTensor,
    seed: u64,
    out: *mut BtsProductReport,
) -> BtsStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = verify_product_with(&t.inner, &SolveOptions { seed }, 1.0).map_err(lift)?;
        *out = BtsProductReport {
            lhs: r.lhs,
            rhs: r.rhs,
            rel_error: r.rel_error,
            degenerate: r.degenerate,
        };
        Ok(())
    })
}

/// θ, φ, Det and the slice factors of an order-3 tensor.
///
/// # Safety
/// `t` must be a live tensor handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bts_invariants_222(t: *const BtsTensor, out: *mut BtsInvariants) -> BtsStatus {
    guard(|| {
        let t = t.as_ref().ok_or_else(|| null("tensor"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let inv = invariants_222(&t.inner.expand()).map_err(lift)?;
        let f = rational_to_f64;
        *out = BtsInvariants {
            theta: [f(&inv.theta[0]), f(&inv.theta[1]), f(&inv.theta[2]), f(&inv.theta[3])],
            phi: f(&inv.phi),
            det: f(&inv.det),
            f3: [f(&inv.f3[0]), f(&inv.f3[1]), f(&inv.f3[2])],
        };
        Ok(())
    })
}

/// ED degree of the partition `mu`.
///
/// # Safety
/// `mu` must point to `mu_len` integers and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn bts_ed_degree(mu: *const usize, mu_len: usize, out: *mut u64) -> BtsStatus {
    guard(|| {
        if mu.is_null() || mu_len == 0 {
            return Err(null("mu"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = Partition::new(std::slice::from_raw_parts(mu, mu_len).to_vec()).map_err(lift)?;
        *out = ed_degree_usize(&p).map_err(lift)? as u64;
        Ok(())
    })
}
