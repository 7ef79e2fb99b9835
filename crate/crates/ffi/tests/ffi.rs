use std::ffi::{CStr, CString};
use std::ptr;

use cyclecert_ffi::*;

fn case(name: &str) -> CString {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/cases").join(name);
    CString::new(path.display().to_string()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn certify_case14_through_handles() {
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(cc_network_from_file(case("case14.m").as_ptr(), &mut net), CcStatus::Ok);
        assert_eq!(cc_network_bus_count(net), 14);
        assert_eq!(cc_network_branch_count(net), 20);

        let mut cert = ptr::null_mut();
        assert_eq!(cc_certify(net, true, &mut cert), CcStatus::Ok);
        let mut verdict = CcVerdict::Inconclusive;
        assert_eq!(cc_certificate_verdict(cert, &mut verdict), CcStatus::Ok);
        assert_eq!(verdict, CcVerdict::Certified);

        let mut theta = [0.0; 14];
        assert_eq!(cc_certificate_theta(cert, theta.as_mut_ptr(), 14), CcStatus::Ok);
        assert_eq!(theta[0], 0.0);
        assert!(theta.iter().any(|t| *t != 0.0));
        assert_eq!(cc_certificate_theta(cert, theta.as_mut_ptr(), 3), CcStatus::BufferSize);
        assert!(last_error().contains("need 14"));

        let json = cc_certificate_to_json(cert);
        assert!(!json.is_null());
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["basis"]["q"], 7);
        cc_string_free(json);

        cc_certificate_free(cert);
        cc_network_free(net);
    }
}

#[test]
fn sweep_and_newton() {
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(cc_network_from_file(case("case9.m").as_ptr(), &mut net), CcStatus::Ok);
        let (mut yc, mut yn) = (0.0, 0.0);
        assert_eq!(cc_sweep(net, 0.0, 0.0, &mut yc, &mut yn), CcStatus::Ok);
        assert!(yc / yn >= 0.99);

        let mut theta = [0.0; 9];
        let mut ok = false;
        assert_eq!(cc_nr_solve(net, theta.as_mut_ptr(), 9, &mut ok), CcStatus::Ok);
        assert!(ok);
        assert!(theta.iter().any(|t| *t != 0.0));
        cc_network_free(net);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut net = ptr::null_mut();
        let missing = CString::new("/nonexistent/case.m").unwrap();
        assert_eq!(cc_network_from_file(missing.as_ptr(), &mut net), CcStatus::Io);
        assert!(net.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new("{\"buses\":[{\"id\":1}],\"branches\":[{\"from\":1,\"to\":9,\"x\":0.1}]}").unwrap();
        assert_eq!(cc_network_from_str(bad.as_ptr(), &mut net), CcStatus::Parse);
        assert!(last_error().contains("unknown bus 9"));

        let split = CString::new("{\"buses\":[{\"id\":1},{\"id\":2}]}").unwrap();
        assert_eq!(cc_network_from_str(split.as_ptr(), &mut net), CcStatus::InvalidNetwork);

        assert_eq!(cc_network_from_str(ptr::null(), &mut net), CcStatus::NullPointer);
        assert_eq!(cc_certify(ptr::null(), false, &mut ptr::null_mut()), CcStatus::NullPointer);
        assert_eq!(cc_network_bus_count(ptr::null()), 0);
        assert!(cc_certificate_to_json(ptr::null()).is_null());
        cc_network_free(ptr::null_mut());
        cc_certificate_free(ptr::null_mut());
        cc_string_free(ptr::null_mut());
    }
}

#[test]
fn inconclusive_verdict_without_angles() {
    let text = CString::new(
        "{\"buses\":[{\"id\":1},{\"id\":2}],\"branches\":[{\"from\":1,\"to\":2,\"x\":0.5}],\
         \"injections\":[{\"id\":1,\"p\":3.0},{\"id\":2,\"p\":-3.0}]}",
    )
    .unwrap();
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(cc_network_from_str(text.as_ptr(), &mut net), CcStatus::Ok);
        let mut cert = ptr::null_mut();
        assert_eq!(cc_certify(net, true, &mut cert), CcStatus::Ok);
        let mut verdict = CcVerdict::Certified;
        cc_certificate_verdict(cert, &mut verdict);
        assert_eq!(verdict, CcVerdict::Inconclusive);
        let mut theta = [0.0; 2];
        assert_eq!(cc_certificate_theta(cert, theta.as_mut_ptr(), 2), CcStatus::Numeric);
        cc_certificate_free(cert);
        cc_network_free(net);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cyclecert.h")).unwrap();
    for name in [
        "cc_last_error",
        "cc_network_from_file",
        "cc_network_from_str",
        "cc_network_free",
        "cc_certify",
        "cc_certificate_verdict",
        "cc_certificate_theta",
        "cc_certificate_to_json",
        "cc_certificate_free",
        "cc_sweep",
        "cc_nr_solve",
        "cc_string_free",
        "typedef struct CcNetwork CcNetwork",
        "CC_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
