use std::ffi::CStr;
use std::ptr;

use fomoh_ffi::*;

fn hd(re: f64, e1: f64, e2: f64, e12: f64) -> FomohHyperDual {
    FomohHyperDual { re, e1, e2, e12 }
}

fn last_error() -> String {
    let p = fomoh_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_rosenbrock(dim: usize) -> *mut FomohObjective {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { fomoh_rosenbrock_new(dim, &mut f) }, FomohStatus::Ok);
    f
}

#[test]
fn hyperdual_arithmetic() {
    let x = fomoh_hd_seed(3.0, 1.0, 1.0);
    assert_eq!(fomoh_hd_mul(x, x), hd(9.0, 6.0, 6.0, 2.0));
    assert_eq!(fomoh_hd_add(x, x), hd(6.0, 2.0, 2.0, 0.0));
    assert_eq!(fomoh_hd_sub(x, x), hd(0.0, 0.0, 0.0, 0.0));

    let mut out = hd(0.0, 0.0, 0.0, 0.0);
    let status = unsafe { fomoh_hd_apply(FomohPrimitive::Exp, fomoh_hd_seed(0.0, 1.0, 1.0), &mut out) };
    assert_eq!(status, FomohStatus::Ok);
    assert_eq!(out, hd(1.0, 1.0, 1.0, 1.0));

    assert_eq!(unsafe { fomoh_hd_powf(x, 3.0, &mut out) }, FomohStatus::Ok);
    assert!((out.re - 27.0).abs() < 1e-12 && (out.e12 - 18.0).abs() < 1e-12);

    assert_eq!(unsafe { fomoh_hd_div(x, x, &mut out) }, FomohStatus::Ok);
    assert!((out.re - 1.0).abs() < 1e-15 && out.e1.abs() < 1e-15 && out.e12.abs() < 1e-15);
}

#[test]
fn hyperdual_errors_set_status_and_message() {
    let mut out = hd(0.0, 0.0, 0.0, 0.0);
    let status = unsafe { fomoh_hd_apply(FomohPrimitive::Sqrt, fomoh_hd_seed(-2.0, 1.0, 0.0), &mut out) };
    assert_eq!(status, FomohStatus::Domain);
    assert!(last_error().contains("sqrt"), "{}", last_error());

    let zero = fomoh_hd_seed(0.0, 1.0, 0.0);
    assert_eq!(unsafe { fomoh_hd_div(zero, zero, &mut out) }, FomohStatus::Domain);
    assert_eq!(unsafe { fomoh_hd_div(zero, zero, ptr::null_mut()) }, FomohStatus::Domain);
    assert_eq!(unsafe { fomoh_hd_powf(zero, 2.0, ptr::null_mut()) }, FomohStatus::NullPointer);
}

#[test]
fn rosenbrock_queries() {
    let f = new_rosenbrock(2);
    assert_eq!(unsafe { fomoh_objective_dim(f) }, 2);
    let theta = [-1.0, 1.0];
    let (mut value, mut grad, mut hess) = (0.0, [0.0; 2], [0.0; 4]);
    unsafe {
        assert_eq!(fomoh_objective_value(f, theta.as_ptr(), &mut value), FomohStatus::Ok);
        assert_eq!(value, 4.0);
        assert_eq!(fomoh_objective_gradient(f, theta.as_ptr(), &mut value, grad.as_mut_ptr()), FomohStatus::Ok);
        assert_eq!(grad, [-4.0, 0.0]);
        assert_eq!(fomoh_objective_hessian(f, theta.as_ptr(), hess.as_mut_ptr()), FomohStatus::Ok);
        assert_eq!(hess, [802.0, 400.0, 400.0, 200.0]);

        let (v1, v2) = ([1.0, 0.0], [0.0, 1.0]);
        let mut z = hd(0.0, 0.0, 0.0, 0.0);
        let status = fomoh_objective_eval_hd(f, theta.as_ptr(), v1.as_ptr(), v2.as_ptr(), &mut z);
        assert_eq!(status, FomohStatus::Ok);
        assert_eq!(z, hd(4.0, -4.0, 0.0, 400.0));
        fomoh_objective_free(f);
    }
}

#[test]
fn quadratic_newton_converges_in_one_step() {
    let a = [4.0, 1.0, 1.0, 3.0];
    let b = [1.0, 2.0];
    let mut f = ptr::null_mut();
    let mut opt = ptr::null_mut();
    let mut theta = [5.0, -7.0];
    let mut before = 0.0;
    unsafe {
        assert_eq!(fomoh_quadratic_new(2, a.as_ptr(), b.as_ptr(), &mut f), FomohStatus::Ok);
        assert_eq!(fomoh_optimizer_new(FomohMethod::FomohKd, 1.0, 2, 7, &mut opt), FomohStatus::Ok);
        assert_eq!(fomoh_optimizer_step(opt, f, theta.as_mut_ptr(), &mut before), FomohStatus::Ok);
        fomoh_optimizer_free(opt);
        fomoh_objective_free(f);
    }
    // A θ* = −b
    let star = [-1.0 / 11.0, -7.0 / 11.0];
    assert!(before > 0.0);
    assert!((theta[0] - star[0]).abs() < 1e-12 && (theta[1] - star[1]).abs() < 1e-12, "{theta:?}");
}

#[test]
fn seeded_optimizers_are_deterministic() {
    let f = new_rosenbrock(4);
    let run = || {
        let mut opt = ptr::null_mut();
        let mut theta = [-1.0, 0.5, 1.5, -0.5];
        unsafe {
            assert_eq!(fomoh_optimizer_new(FomohMethod::Fomoh, 0.5, 0, 11, &mut opt), FomohStatus::Ok);
            for _ in 0..50 {
                assert_eq!(fomoh_optimizer_step(opt, f, theta.as_mut_ptr(), ptr::null_mut()), FomohStatus::Ok);
            }
            fomoh_optimizer_free(opt);
        }
        theta
    };
    assert_eq!(run(), run());
    unsafe { fomoh_objective_free(f) };
}

#[test]
fn invalid_arguments_are_reported() {
    let mut f = ptr::null_mut();
    let mut opt = ptr::null_mut();
    unsafe {
        assert_eq!(fomoh_rosenbrock_new(1, &mut f), FomohStatus::InvalidArgument);
        assert!(f.is_null());
        assert_eq!(fomoh_rosenbrock_new(2, ptr::null_mut()), FomohStatus::NullPointer);

        let asym = [1.0, 2.0, 0.0, 1.0];
        let b = [0.0, 0.0];
        assert_eq!(fomoh_quadratic_new(2, asym.as_ptr(), b.as_ptr(), &mut f), FomohStatus::InvalidArgument);
        assert_eq!(fomoh_quadratic_new(2, ptr::null(), b.as_ptr(), &mut f), FomohStatus::NullPointer);
        assert!(last_error().contains("`a`"));

        assert_eq!(fomoh_optimizer_new(FomohMethod::Sgd, -1.0, 0, 0, &mut opt), FomohStatus::InvalidArgument);
        assert_eq!(fomoh_optimizer_new(FomohMethod::FomohKd, 0.1, 0, 0, &mut opt), FomohStatus::InvalidArgument);
        assert!(opt.is_null());

        let g = new_rosenbrock(2);
        let theta = [0.0, 0.0];
        assert_eq!(fomoh_objective_value(g, ptr::null(), ptr::null_mut()), FomohStatus::NullPointer);
        assert_eq!(fomoh_objective_value(g, theta.as_ptr(), ptr::null_mut()), FomohStatus::NullPointer);
        assert_eq!(fomoh_objective_dim(ptr::null()), 0);
        fomoh_objective_free(g);
        fomoh_objective_free(ptr::null_mut());
        fomoh_optimizer_free(ptr::null_mut());
    }
}
