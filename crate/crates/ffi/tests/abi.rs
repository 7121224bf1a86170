use std::ffi::{CStr, CString};
use std::ptr;

use onofri_lab_ffi::*;

fn last_error() -> String {
    let p = onofri_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn constants_round_trip() {
    let mut v = 0.0;
    assert_eq!(unsafe { onofri_theta0(2.0, &mut v) }, OnofriStatus::Ok);
    assert!((v - 1.0).abs() < 1e-15);

    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { onofri_abc(2.0, 1.0, &mut a, &mut b, &mut c) }, OnofriStatus::Ok);
    assert!((a - 0.5).abs() < 1e-15 && (b + 0.5).abs() < 1e-15 && (c - 0.125).abs() < 1e-15);

    let (mut delta, mut sign) = (0.0, 0i8);
    assert_eq!(unsafe { onofri_discriminant(3.0, 1.0, &mut delta, &mut sign) }, OnofriStatus::Ok);
    assert_eq!(sign, 1);

    assert_eq!(unsafe { onofri_theta0(6.0, &mut v) }, OnofriStatus::Domain);
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(unsafe { onofri_theta0(2.0, ptr::null_mut()) }, OnofriStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut v = 0.0;
    assert_eq!(unsafe { onofri_first_eigenvalue(ptr::null(), &mut v) }, OnofriStatus::NullPointer);
    assert_eq!(unsafe { onofri_geometry_resolution(ptr::null()) }, 0);
    unsafe { onofri_geometry_free(ptr::null_mut()) };
}

#[test]
fn sphere_quotient_and_functional() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(onofri_geometry_sphere(48, 1.0, &mut g), OnofriStatus::Ok);
        let n = onofri_geometry_resolution(g);
        assert_eq!(n, 48);

        let mut lam1 = 0.0;
        assert_eq!(onofri_first_eigenvalue(g, &mut lam1), OnofriStatus::Ok);
        assert!((lam1 - 2.0).abs() < 1e-10);

        let mut theta = vec![0.0; n];
        let mut written = 0;
        assert_eq!(onofri_geometry_nodes(g, theta.as_mut_ptr(), n, &mut written), OnofriStatus::Ok);
        assert_eq!(written, n);
        let short = onofri_geometry_nodes(g, theta.as_mut_ptr(), n - 1, &mut written);
        assert_eq!(short, OnofriStatus::BufferTooSmall);

        // small first harmonic: quotient tends to 1
        let small: Vec<f64> = theta.iter().map(|t| 1e-3 * t.cos()).collect();
        let mut h = ptr::null_mut();
        assert_eq!(onofri_field_from_values(g, small.as_ptr(), n, &mut h), OnofriStatus::Ok);
        let mut q = 0.0;
        assert_eq!(onofri_lambda_star_quotient(h, &mut q), OnofriStatus::Ok);
        assert!((q - 1.0).abs() < 1e-5, "quotient {q}");
        onofri_field_free(h);

        let vals: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let mut f = ptr::null_mut();
        assert_eq!(onofri_field_from_values(g, vals.as_ptr(), n, &mut f), OnofriStatus::Ok);
        assert_eq!(onofri_lambda_star_quotient(f, &mut q), OnofriStatus::Ok);
        assert!(q > 1.0);

        let mut fv = 0.0;
        assert_eq!(onofri_functional_f(f, 1.0, &mut fv), OnofriStatus::Ok);
        let oracle = 2.0 * std::f64::consts::PI / 3.0 - 4.0 * std::f64::consts::PI * 1f64.sinh().ln();
        assert!((fv - oracle).abs() < 1e-10, "F {fv} vs {oracle}");

        let mut back = vec![0.0; n];
        assert_eq!(onofri_field_values(f, back.as_mut_ptr(), n, ptr::null_mut()), OnofriStatus::Ok);
        assert_eq!(back, vals);

        let mut bad = ptr::null_mut();
        let st = onofri_field_from_values(g, vals.as_ptr(), n - 1, &mut bad);
        assert_ne!(st, OnofriStatus::Ok);
        assert!(bad.is_null());

        onofri_field_free(f);
        onofri_geometry_free(g);
    }
}

#[test]
fn el_and_flow() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(onofri_geometry_sphere(24, 1.0, &mut g), OnofriStatus::Ok);
        let n = onofri_geometry_resolution(g);
        let mut theta = vec![0.0; n];
        onofri_geometry_nodes(g, theta.as_mut_ptr(), n, ptr::null_mut());

        let init: Vec<f64> = theta.iter().map(|t| 0.3 * t.cos()).collect();
        let mut f = ptr::null_mut();
        assert_eq!(onofri_field_from_values(g, init.as_ptr(), n, &mut f), OnofriStatus::Ok);

        let (mut sol, mut res, mut constant) = (ptr::null_mut(), 1.0, false);
        assert_eq!(onofri_solve_el(f, 0.5, 1e-10, &mut sol, &mut res, &mut constant), OnofriStatus::Ok);
        assert!(constant && res < 1e-9);
        let mut u = vec![0.0; n];
        onofri_field_values(sol, u.as_mut_ptr(), n, ptr::null_mut());
        assert!(u.iter().all(|x| (x - 0.5f64.ln()).abs() < 1e-8));

        let mut tr = ptr::null_mut();
        assert_eq!(onofri_flow_evolve(f, 1.0, 0.2, 0.25, &mut tr), OnofriStatus::Ok);
        let len = onofri_flow_trace_len(tr);
        assert!(len > 2);
        let (mut t0, mut f0, mut g0, mut m0) = (0.0, 0.0, 0.0, 0.0);
        let (mut t1, mut f1, mut g1, mut m1) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(onofri_flow_trace_sample(tr, 0, &mut t0, &mut f0, &mut g0, &mut m0), OnofriStatus::Ok);
        assert_eq!(onofri_flow_trace_sample(tr, len - 1, &mut t1, &mut f1, &mut g1, &mut m1), OnofriStatus::Ok);
        assert_eq!(t0, 0.0);
        assert!((t1 - 0.2).abs() < 1e-12);
        assert!(f1 < f0);
        assert!((m1 - m0).abs() < 1e-10 * m0);
        assert_eq!(
            onofri_flow_trace_sample(tr, len, &mut t1, &mut f1, &mut g1, &mut m1),
            OnofriStatus::InvalidArgument
        );
        let (mut e, mut md) = (1.0, 1.0);
        assert_eq!(onofri_flow_trace_diagnostics(tr, &mut e, &mut md), OnofriStatus::Ok);
        assert!(e < 1e-5 && md < 1e-10, "defect {e}, drift {md}");

        onofri_flow_trace_free(tr);
        onofri_field_free(sol);
        onofri_field_free(f);
        onofri_geometry_free(g);
    }
}

#[test]
fn flow_rejects_circle() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(onofri_geometry_circle(32, 1.0, &mut g), OnofriStatus::Ok);
        let vals = vec![0.0; 32];
        let mut f = ptr::null_mut();
        onofri_field_from_values(g, vals.as_ptr(), 32, &mut f);
        let mut tr = ptr::null_mut();
        assert_ne!(onofri_flow_evolve(f, 1.0, 0.1, 0.25, &mut tr), OnofriStatus::Ok);
        assert!(tr.is_null());
        onofri_field_free(f);
        onofri_geometry_free(g);
    }
}

#[test]
fn weights() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(onofri_geometry_plane(256, 20.0, &mut g), OnofriStatus::Ok);
        let spec = CString::new("stereographic").unwrap();
        let mut w = ptr::null_mut();
        assert_eq!(onofri_weight_new(g, spec.as_ptr(), &mut w), OnofriStatus::Ok);
        let mut l = 0.0;
        assert_eq!(onofri_weight_lambda_star(w, &mut l), OnofriStatus::Ok);
        assert!((l - 1.0).abs() < 1e-6, "Λ⋆ {l}");
        onofri_weight_free(w);

        let bad = CString::new("no-such-weight").unwrap();
        let mut w = ptr::null_mut();
        assert_ne!(onofri_weight_new(g, bad.as_ptr(), &mut w), OnofriStatus::Ok);
        assert!(w.is_null());
        onofri_geometry_free(g);
    }
}

#[test]
fn identity_suite_and_version() {
    let suite = CString::new("circle").unwrap();
    let (mut p, mut f) = (0, 0);
    let st = unsafe { onofri_identity_suite(suite.as_ptr(), 4, 7, 0.0, &mut p, &mut f) };
    assert_eq!(st, OnofriStatus::Ok);
    assert!(p > 0);
    assert_eq!(f, 0);
    let v = unsafe { CStr::from_ptr(onofri_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
