use std::ffi::CStr;
use std::ptr;

use berezin_kit_ffi::*;

fn c(re: f64, im: f64) -> BkComplex {
    BkComplex { re, im }
}

fn last_error() -> String {
    let p = bk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn canonical_operator_is_symmetric() {
    let mut op = ptr::null_mut();
    let n = [1u32, 0];
    let phi0 = [c(0.1, 0.2), c(-0.2, 0.0)];
    let phi1 = [c(0.3, -0.1), c(0.2, 0.2)];
    let status =
        unsafe { bk_operator_canonical_j(2, 2, n.as_ptr(), phi0.as_ptr(), phi1.as_ptr(), c(1.0, 0.5), &mut op) };
    assert_eq!(status, BkStatus::Ok);
    let mut d = f64::NAN;
    assert_eq!(unsafe { bk_cs_defect(op, 100, 0.8, 7, &mut d) }, BkStatus::Ok);
    assert!(d < 1e-9, "{d}");
    unsafe { bk_operator_free(op) };
}

#[test]
fn generic_operator_is_not_symmetric() {
    let psi = [c(1.0, 0.0), c(0.3, 0.2), c(0.0, -0.4)];
    let mut op = ptr::null_mut();
    let s = unsafe {
        bk_operator_comp_diff(
            1,
            1,
            psi.as_ptr(),
            psi.len(),
            c(0.1, 0.1),
            c(0.4, 0.0),
            c(0.2, 0.0),
            &mut op,
        )
    };
    assert_eq!(s, BkStatus::Ok);
    let (mut cs, mut sa) = (0.0, 0.0);
    assert_eq!(unsafe { bk_cs_defect(op, 100, 0.8, 1, &mut cs) }, BkStatus::Ok);
    assert_eq!(unsafe { bk_sa_defect(op, 100, 0.8, 1, &mut sa) }, BkStatus::Ok);
    assert!(cs > 1e-4 && sa > 1e-4, "{cs} {sa}");
    let mut rot = 0.0;
    assert_eq!(
        unsafe { bk_cs_defect_rotation(op, c(0.0, 1.0), c(-1.0, 0.0), 100, 0.8, 1, &mut rot) },
        BkStatus::Ok
    );
    assert!(rot > 1e-4);
    assert_eq!(
        unsafe { bk_cs_defect_rotation(op, c(2.0, 0.0), c(1.0, 0.0), 100, 0.8, 1, &mut rot) },
        BkStatus::InvalidArgument
    );
    assert!(last_error().contains("unimodular"));
    unsafe { bk_operator_free(op) };
}

#[test]
fn self_adjoint_family() {
    let mut op = ptr::null_mut();
    let s = unsafe {
        bk_operator_canonical_sa(
            1,
            1,
            [2u32].as_ptr(),
            [c(0.2, 0.1)].as_ptr(),
            [0.3].as_ptr(),
            1.5,
            &mut op,
        )
    };
    assert_eq!(s, BkStatus::Ok);
    let mut d = f64::NAN;
    assert_eq!(unsafe { bk_sa_defect(op, 100, 0.8, 3, &mut d) }, BkStatus::Ok);
    assert!(d < 1e-9, "{d}");
    unsafe { bk_operator_free(op) };
}

#[test]
fn blaschke_values_and_witnesses() {
    let mut v = c(0.0, 0.0);
    assert_eq!(
        unsafe { bk_berezin_blaschke(1, c(0.0, 0.0), c(0.3, 0.4), &mut v) },
        BkStatus::Ok
    );
    assert!((v.re - 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    // real slice: w = r alpha gives (1 - r |alpha|^2)^gamma
    assert_eq!(
        unsafe { bk_berezin_blaschke(2, c(0.5, 0.0), c(0.25, 0.0), &mut v) },
        BkStatus::Ok
    );
    assert!((v.re - 0.875f64.powi(2)).abs() < 1e-14 && v.im.abs() < 1e-14);

    let (mut lambda, mut residual) = (c(0.0, 0.0), f64::NAN);
    assert_eq!(
        unsafe { bk_symmetry_witness(3, c(0.3, 0.4), c(0.1, -0.6), &mut lambda, &mut residual) },
        BkStatus::Ok
    );
    assert!(residual < 1e-11);
    let (mut a, mut b) = (c(0.0, 0.0), c(0.0, 0.0));
    unsafe {
        bk_berezin_blaschke(3, c(0.3, 0.4), c(0.1, -0.6), &mut a);
        bk_berezin_blaschke(3, c(0.3, 0.4), lambda, &mut b);
    }
    assert!((a.re - b.re).abs() < 1e-11 && (a.im + b.im).abs() < 1e-11);

    let mut cert = BkCertificate {
        z: c(0.0, 0.0),
        v: c(0.0, 0.0),
        partner: c(0.0, 0.0),
        partner_residual: 0.0,
        midpoint: 0.0,
        real_slice_inf: 0.0,
        gap: 0.0,
    };
    assert_eq!(
        unsafe { bk_nonconvexity_certificate(1, c(0.5, 0.0), &mut cert) },
        BkStatus::Ok
    );
    assert!(cert.gap > 0.0 && cert.v.im != 0.0 && cert.midpoint == cert.v.re);
    assert_eq!(
        unsafe { bk_nonconvexity_certificate(1, c(0.0, 0.0), &mut cert) },
        BkStatus::NotFound
    );
}

#[test]
fn cloud_handle() {
    let mut cloud = ptr::null_mut();
    assert_eq!(
        unsafe { bk_cloud_blaschke(1, c(0.5, 0.0), 10, 16, 0.9, &mut cloud) },
        BkStatus::Ok
    );
    let len = unsafe { bk_cloud_len(cloud) };
    assert_eq!(len, 160);
    let (mut w, mut v) = (c(0.0, 0.0), c(0.0, 0.0));
    for k in [0, len - 1] {
        assert_eq!(unsafe { bk_cloud_get(cloud, k, &mut w, &mut v) }, BkStatus::Ok);
        let mut direct = c(0.0, 0.0);
        unsafe { bk_berezin_blaschke(1, c(0.5, 0.0), w, &mut direct) };
        assert_eq!(direct, v);
    }
    assert_eq!(
        unsafe { bk_cloud_get(cloud, len, &mut w, &mut v) },
        BkStatus::IndexOutOfRange
    );
    unsafe { bk_cloud_free(cloud) };
    assert_eq!(unsafe { bk_cloud_len(ptr::null()) }, 0);
}

#[test]
fn errors_are_reported() {
    let mut v = c(0.0, 0.0);
    assert_eq!(
        unsafe { bk_berezin_blaschke(1, c(1.5, 0.0), c(0.0, 0.0), &mut v) },
        BkStatus::InvalidArgument
    );
    assert!(last_error().contains("alpha"));
    assert_eq!(
        unsafe { bk_berezin_blaschke(1, c(0.5, 0.0), c(2.0, 0.0), &mut v) },
        BkStatus::OutsideDisk
    );
    assert_eq!(
        unsafe { bk_berezin_blaschke(1, c(0.5, 0.0), c(0.0, 0.0), ptr::null_mut()) },
        BkStatus::NullPointer
    );
    assert!(last_error().contains("value"));
    let mut d = 0.0;
    assert_eq!(
        unsafe { bk_cs_defect(ptr::null(), 10, 0.5, 0, &mut d) },
        BkStatus::NullPointer
    );
    let mut op = ptr::null_mut();
    let s = unsafe { bk_operator_comp_diff(1, 0, ptr::null(), 2, c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), &mut op) };
    assert_eq!(s, BkStatus::NullPointer);
    assert!(op.is_null());
    let name = unsafe { CStr::from_ptr(bk_status_name(BkStatus::Precision)) };
    assert_eq!(name.to_str().unwrap(), "precision");
    unsafe { bk_operator_free(ptr::null_mut()) };
    unsafe { bk_cloud_free(ptr::null_mut()) };
}

#[test]
fn errors_are_per_thread() {
    let mut v = c(0.0, 0.0);
    assert_eq!(
        unsafe { bk_berezin_blaschke(1, c(1.5, 0.0), c(0.0, 0.0), &mut v) },
        BkStatus::InvalidArgument
    );
    let other = std::thread::spawn(|| bk_last_error_message().is_null()).join().unwrap();
    assert!(other);
}
