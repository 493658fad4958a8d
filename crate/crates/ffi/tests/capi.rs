use std::ffi::CStr;
use std::ptr;

use spinor_tf_ffi::*;

fn last_error() -> Option<String> {
    let p = spinor_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn version_and_names() {
    let v = unsafe { CStr::from_ptr(spinor_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let name = |r| unsafe { CStr::from_ptr(spinor_regime_name(r)) }.to_str().unwrap().to_string();
    assert_eq!(name(SpinorRegime::NsMs), "NS_MS");
    assert_eq!(name(SpinorRegime::Alpha0QNeg), "ALPHA0_QNEG");
}

#[test]
fn critical_fields_and_classification() {
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    unsafe {
        assert_eq!(spinor_critical_q1(1.0, 1.0, 1.0, &mut q1), SpinorStatus::Ok);
        assert_eq!(spinor_critical_q2(1.0, 1.0, 0.0, &mut q2), SpinorStatus::Ok);
    }
    assert!((q1 - (2f64.sqrt() - 1.0)).abs() < 1e-14);
    assert!((q2 - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-14);

    let mut regime = SpinorRegime::Pure3c;
    assert_eq!(unsafe { spinor_classify(0.8, 0.1, 1.0, 0.2, &mut regime) }, SpinorStatus::Ok);
    assert_eq!(regime, SpinorRegime::Ns2c);
    assert_eq!(unsafe { spinor_classify(-0.5, -0.3, 1.0, 0.0, &mut regime) }, SpinorStatus::Ok);
    assert_eq!(regime, SpinorRegime::MsMs);

    let status = unsafe { spinor_critical_q1(-0.5, 1.0, 0.0, &mut q1) };
    assert_eq!(status, SpinorStatus::InvalidArgument);
    assert!(last_error().is_some());
}

#[test]
fn solution_round_trip() {
    let mut sol: *mut SpinorSolution = ptr::null_mut();
    unsafe {
        assert_eq!(spinor_solution_new(-0.5, -0.2, 2.0, 1.0, &mut sol), SpinorStatus::Ok);
        assert!(!sol.is_null());
        let (mut regime, mut r, mut e0) = (SpinorRegime::NsMs, 0.0, 0.0);
        assert_eq!(spinor_solution_info(sol, &mut regime, &mut r, &mut e0), SpinorStatus::Ok);
        assert_eq!(regime, SpinorRegime::MsMs);
        assert!((r - 0.75).abs() < 1e-15);

        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        assert_eq!(spinor_solution_state(sol, 0, a.as_mut_ptr()), SpinorStatus::Ok);
        assert_eq!(spinor_solution_state(sol, 1, b.as_mut_ptr()), SpinorStatus::Ok);
        assert!((a[0] - 2f64.sqrt()).abs() < 1e-15 && a[1] == 0.0 && a[2] == 0.0);
        assert!((b[2] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(spinor_solution_state(sol, 2, b.as_mut_ptr()), SpinorStatus::InvalidArgument);

        let (mut dm, mut dz) = (1.0, 1.0);
        assert_eq!(spinor_solution_residuals(sol, &mut dm, &mut dz), SpinorStatus::Ok);
        assert!(dm.abs() < 1e-12 && dz.abs() < 1e-12);
        spinor_solution_free(sol);
    }
}

#[test]
fn solver_errors_map_to_status() {
    let mut sol: *mut SpinorSolution = ptr::null_mut();
    unsafe {
        assert_eq!(spinor_solution_new(0.5, 0.1, 1.0, 2.0, &mut sol), SpinorStatus::InvalidArgument);
        assert!(sol.is_null());
        assert!(last_error().unwrap().contains("magnetization"));
        assert_eq!(spinor_solution_new(-0.5, 1.0, 1.0, 0.0, &mut sol), SpinorStatus::Degenerate);
        assert!(sol.is_null());
    }
    let mut regime = SpinorRegime::NsMs;
    assert_eq!(unsafe { spinor_classify(0.5, 0.1, 1.0, 0.0, &mut regime) }, SpinorStatus::Ok);
    assert!(last_error().is_none());
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(spinor_critical_q1(1.0, 1.0, 0.0, ptr::null_mut()), SpinorStatus::NullPointer);
        assert_eq!(spinor_classify(1.0, 0.0, 1.0, 0.0, ptr::null_mut()), SpinorStatus::NullPointer);
        assert_eq!(spinor_solution_new(1.0, 0.0, 1.0, 0.0, ptr::null_mut()), SpinorStatus::NullPointer);
        let mut r = 0.0;
        let mut reg = SpinorRegime::NsMs;
        assert_eq!(spinor_solution_info(ptr::null(), &mut reg, &mut r, &mut r), SpinorStatus::NullPointer);
        let mut pot: *mut SpinorPotential = ptr::null_mut();
        assert_eq!(spinor_potential_new(ptr::null(), &mut pot), SpinorStatus::NullPointer);
        assert_eq!(spinor_potential_eval(ptr::null(), [0.0; 3].as_ptr(), &mut r), SpinorStatus::NullPointer);
        spinor_solution_free(ptr::null_mut());
        spinor_potential_free(ptr::null_mut());
    }
    assert!(last_error().is_some());
}

#[test]
fn potential_and_tensions() {
    unsafe {
        let mut sol: *mut SpinorSolution = ptr::null_mut();
        assert_eq!(spinor_solution_new(-0.5, -0.2, 1.0, 0.0, &mut sol), SpinorStatus::Ok);
        let mut pot: *mut SpinorPotential = ptr::null_mut();
        assert_eq!(spinor_potential_new(sol, &mut pot), SpinorStatus::Ok);

        let (a, b) = ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let mut v = 1.0;
        assert_eq!(spinor_potential_eval(pot, a.as_ptr(), &mut v), SpinorStatus::Ok);
        assert!(v.abs() < 1e-14);
        assert_eq!(spinor_potential_eval(pot, [0.0; 3].as_ptr(), &mut v), SpinorStatus::Ok);
        assert!((v - 0.25).abs() < 1e-14);
        let mut g = [1.0; 3];
        assert_eq!(spinor_potential_grad(pot, b.as_ptr(), g.as_mut_ptr()), SpinorStatus::Ok);
        assert!(g.iter().all(|x| x.abs() < 1e-12));
        assert_eq!(spinor_potential_eval(pot, ptr::null(), &mut v), SpinorStatus::InvalidArgument);

        let mut g0a = 0.0;
        assert_eq!(spinor_geodesic_cost(pot, [0.0; 3].as_ptr(), a.as_ptr(), 48, &mut g0a), SpinorStatus::Ok);
        assert!((g0a - 1.0 / 3.0).abs() < 1e-4, "{g0a}");

        let mut theta = 0.0;
        assert_eq!(spinor_young_angle(0.328, g0a, g0a, &mut theta), SpinorStatus::Ok);
        assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert_eq!(spinor_young_angle(0.1, 0.0, 1.0, &mut theta), SpinorStatus::Numerical);

        spinor_potential_free(pot);
        spinor_solution_free(sol);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spinor_tf.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert_eq!(exports.len(), 17);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct SpinorSolution SpinorSolution;"));
    assert!(header.contains("SpinorStatus_NullPointer = 1"));
}
