//! C ABI over `cyclecert`.
//!
//! Networks and certificates are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`CcStatus`]; on failure
//! [`cc_last_error`] describes the problem until the next call on the same
//! thread. Strings returned by the library are freed with [`cc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cyclecert::certify::{Certificate, Certifier, CertifyOptions};
use cyclecert::netparse::{losslessify, parse_case, LosslessOptions, Network};
use cyclecert::refsolvers::{nr_solve, NrOptions};
use cyclecert::sweep::{stress_sweep, SweepOptions};
use cyclecert::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidNetwork = 5,
    Numeric = 6,
    BufferSize = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcVerdict {
    Certified = 0,
    Inconclusive = 1,
}

/// Opaque validated lossless network.
pub struct CcNetwork(Network);

/// Opaque certification result.
pub struct CcCertificate(Certificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> CcStatus {
    match err {
        Error::Parse(_) => CcStatus::Parse,
        Error::Disconnected { .. }
        | Error::ZeroReactance { .. }
        | Error::UnknownSlack(_)
        | Error::InvalidNetwork(_)
        | Error::Unbalanced { .. }
        | Error::Dimension { .. }
        | Error::ZeroInjection => CcStatus::InvalidNetwork,
        Error::SingularLaplacian | Error::Domain { .. } | Error::Consistency(_) => CcStatus::Numeric,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CcStatus, String)>) -> CcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (CcStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (CcStatus, String)> {
    if s.is_null() {
        return Err((CcStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (CcStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, (CcStatus, String)> {
    p.as_ref().ok_or((CcStatus::NullPointer, "null handle".into()))
}

fn null_out() -> (CcStatus, String) {
    (CcStatus::NullPointer, "null output pointer".into())
}

fn build_network(text: &str) -> Result<Network, (CcStatus, String)> {
    let raw = parse_case(text).map_err(|e| lib_err(e.into()))?;
    losslessify(&raw, &LosslessOptions::default()).map(|(n, _)| n).map_err(lib_err)
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a MATPOWER or JSON case with flat voltages and balanced injections.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_network_from_file(path: *const c_char, out: *mut *mut CcNetwork) -> CcStatus {
    guard(|| {
        let path = read_str(path)?;
        if out.is_null() {
            return Err(null_out());
        }
        let text = std::fs::read_to_string(Path::new(path)).map_err(|e| (CcStatus::Io, format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(CcNetwork(build_network(&text)?)));
        Ok(())
    })
}

/// Same as [`cc_network_from_file`] for in-memory case text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_network_from_str(text: *const c_char, out: *mut *mut CcNetwork) -> CcStatus {
    guard(|| {
        let text = read_str(text)?;
        if out.is_null() {
            return Err(null_out());
        }
        *out = Box::into_raw(Box::new(CcNetwork(build_network(text)?)));
        Ok(())
    })
}

/// Bus count, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_network_bus_count(net: *const CcNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.n())
}

/// Branch count after merging parallel branches, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_network_branch_count(net: *const CcNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.m())
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_network_free(net: *mut CcNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Certifies the network at its own injections with default options.
///
/// # Safety
/// `net` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_certify(net: *const CcNetwork, recover_solution: bool, out: *mut *mut CcCertificate) -> CcStatus {
    guard(|| {
        let net = handle(net)?;
        if out.is_null() {
            return Err(null_out());
        }
        let opts = CertifyOptions {
            recover_solution,
            ..CertifyOptions::default()
        };
        let cert = Certifier::new(&net.0, opts)
            .and_then(|c| c.certify(&net.0.injections))
            .map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CcCertificate(cert)));
        Ok(())
    })
}

/// # Safety
/// `cert` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_certificate_verdict(cert: *const CcCertificate, out: *mut CcVerdict) -> CcStatus {
    guard(|| {
        let cert = handle(cert)?;
        if out.is_null() {
            return Err(null_out());
        }
        *out = if cert.0.verdict.is_certified() {
            CcVerdict::Certified
        } else {
            CcVerdict::Inconclusive
        };
        Ok(())
    })
}

/// Copies the recovered angles (radians, one per bus) into `theta`.
/// Fails with `BufferSize` when `len` differs from the bus count and with
/// `Numeric` when no angles were recovered.
///
/// # Safety
/// `cert` must be a live handle and `theta` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cc_certificate_theta(cert: *const CcCertificate, theta: *mut f64, len: usize) -> CcStatus {
    guard(|| {
        let cert = handle(cert)?;
        if theta.is_null() {
            return Err(null_out());
        }
        let sol = cert
            .0
            .theta
            .as_ref()
            .ok_or((CcStatus::Numeric, "certificate carries no angle solution".into()))?;
        if sol.theta.len() != len {
            return Err((CcStatus::BufferSize, format!("need {} entries, got {len}", sol.theta.len())));
        }
        ptr::copy_nonoverlapping(sol.theta.as_ptr(), theta, len);
        Ok(())
    })
}

/// Certificate as JSON; release with [`cc_string_free`]. Null on failure.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cc_certificate_to_json(cert: *const CcCertificate) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let cert = handle(cert)?;
        let text = serde_json::to_string(&cert.0).map_err(|e| (CcStatus::Numeric, e.to_string()))?;
        out = CString::new(text)
            .map_err(|e| (CcStatus::InvalidUtf8, e.to_string()))?
            .into_raw();
        Ok(())
    });
    out
}

/// # Safety
/// `cert` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_certificate_free(cert: *mut CcCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Certified and Newton-Raphson load margins under uniform scaling.
/// Non-positive `y_max` or `tol` select the defaults (20 and 1e-3).
///
/// # Safety
/// `net` must be a live handle; `y_cert` and `y_nr` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn cc_sweep(
    net: *const CcNetwork,
    y_max: f64,
    tol: f64,
    y_cert: *mut f64,
    y_nr: *mut f64,
) -> CcStatus {
    guard(|| {
        let net = handle(net)?;
        if y_cert.is_null() || y_nr.is_null() {
            return Err(null_out());
        }
        let mut opts = SweepOptions::default();
        if y_max > 0.0 {
            opts.y_max = y_max;
        }
        if tol > 0.0 {
            opts.tol = tol;
        }
        let r = stress_sweep(&net.0, &opts).map_err(lib_err)?;
        *y_cert = r.y_cert;
        *y_nr = r.y_nr;
        Ok(())
    })
}

/// Newton-Raphson from the angles in `theta` (length = bus count); the
/// final iterate is written back. `converged` reports convergence with every
/// branch angle within pi/2.
///
/// # Safety
/// `net` must be a live handle, `theta` must hold `len` doubles and
/// `converged` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cc_nr_solve(
    net: *const CcNetwork,
    theta: *mut f64,
    len: usize,
    converged: *mut bool,
) -> CcStatus {
    guard(|| {
        let net = handle(net)?;
        if theta.is_null() || converged.is_null() {
            return Err(null_out());
        }
        if len != net.0.n() {
            return Err((CcStatus::BufferSize, format!("need {} entries, got {len}", net.0.n())));
        }
        let start = std::slice::from_raw_parts(theta, len).to_vec();
        let r = nr_solve(&net.0, &start, &NrOptions::default()).map_err(lib_err)?;
        *converged = r.success();
        if let Some(t) = r.theta {
            ptr::copy_nonoverlapping(t.as_ptr(), theta, len);
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
