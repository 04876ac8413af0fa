//! C ABI for `fomoh`.
//!
//! Objectives and optimizers are opaque heap handles created by `*_new`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`FomohStatus`]; on failure the message is available from
//! [`fomoh_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fomoh::hyperdual::{hessian_full, Primitive};
use fomoh::models::{rosenbrock, Quadratic, Rosenbrock};
use fomoh::optim::{Method, Optimizer, OptimizerConfig};
use fomoh::{Error, HyperDual, Objective};
use ndarray::{Array1, Array2};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FomohStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Singular = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FomohMethod {
    Fgd = 0,
    Fomoh = 1,
    FomohBp = 2,
    FomohKd = 3,
    Sgd = 4,
    Newton = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FomohPrimitive {
    Neg = 0,
    Recip = 1,
    Exp = 2,
    Log = 3,
    Sqrt = 4,
    Tanh = 5,
    Sigmoid = 6,
    Relu = 7,
    Abs = 8,
    Sin = 9,
    Cos = 10,
}

/// `re + e1 ε₁ + e2 ε₂ + e12 ε₁ε₂`
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomohHyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl From<HyperDual> for FomohHyperDual {
    fn from(x: HyperDual) -> Self {
        FomohHyperDual { re: x.re, e1: x.e1, e2: x.e2, e12: x.e12 }
    }
}

impl From<FomohHyperDual> for HyperDual {
    fn from(x: FomohHyperDual) -> Self {
        HyperDual { re: x.re, e1: x.e1, e2: x.e2, e12: x.e12 }
    }
}

enum Inner {
    Rosenbrock(Rosenbrock),
    Quadratic(Quadratic),
}

/// Opaque objective handle.
pub struct FomohObjective {
    inner: Inner,
}

impl FomohObjective {
    fn get(&self) -> &dyn Objective {
        match &self.inner {
            Inner::Rosenbrock(f) => f,
            Inner::Quadratic(f) => f,
        }
    }
}

/// Opaque optimizer handle.
pub struct FomohOptimizer {
    inner: Optimizer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> FomohStatus {
    match e {
        Error::Domain { .. } | Error::TensorDomain { .. } | Error::DivisionByZero => FomohStatus::Domain,
        Error::Singular { .. } => FomohStatus::Singular,
        _ => FomohStatus::InvalidArgument,
    }
}

struct Failure(FomohStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FomohStatus::NullPointer, format!("`{what}` is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FomohStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FomohStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FomohStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the most recent failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn fomoh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Seed a hyper-dual number `re + v1 ε₁ + v2 ε₂`.
#[no_mangle]
pub extern "C" fn fomoh_hd_seed(re: f64, v1: f64, v2: f64) -> FomohHyperDual {
    HyperDual::seed(re, v1, v2).into()
}

#[no_mangle]
pub extern "C" fn fomoh_hd_add(a: FomohHyperDual, b: FomohHyperDual) -> FomohHyperDual {
    (HyperDual::from(a) + HyperDual::from(b)).into()
}

#[no_mangle]
pub extern "C" fn fomoh_hd_sub(a: FomohHyperDual, b: FomohHyperDual) -> FomohHyperDual {
    (HyperDual::from(a) - HyperDual::from(b)).into()
}

#[no_mangle]
pub extern "C" fn fomoh_hd_mul(a: FomohHyperDual, b: FomohHyperDual) -> FomohHyperDual {
    (HyperDual::from(a) * HyperDual::from(b)).into()
}

/// # Safety
/// `out` must be null or valid for a write of one `FomohHyperDual`.
#[no_mangle]
pub unsafe extern "C" fn fomoh_hd_div(a: FomohHyperDual, b: FomohHyperDual, out: *mut FomohHyperDual) -> FomohStatus {
    guard(|| {
        let q = HyperDual::from(a).checked_div(b.into())?;
        write_out(out, q.into(), "out")
    })
}

/// Apply an elementary function.
///
/// # Safety
/// `out` must be null or valid for a write of one `FomohHyperDual`.
#[no_mangle]
pub unsafe extern "C" fn fomoh_hd_apply(p: FomohPrimitive, x: FomohHyperDual, out: *mut FomohHyperDual) -> FomohStatus {
    let p = match p {
        FomohPrimitive::Neg => Primitive::Neg,
        FomohPrimitive::Recip => Primitive::Recip,
        FomohPrimitive::Exp => Primitive::Exp,
        FomohPrimitive::Log => Primitive::Log,
        FomohPrimitive::Sqrt => Primitive::Sqrt,
        FomohPrimitive::Tanh => Primitive::Tanh,
        FomohPrimitive::Sigmoid => Primitive::Sigmoid,
        FomohPrimitive::Relu => Primitive::Relu,
        FomohPrimitive::Abs => Primitive::Abs,
        FomohPrimitive::Sin => Primitive::Sin,
        FomohPrimitive::Cos => Primitive::Cos,
    };
    guard(|| write_out(out, HyperDual::from(x).unary(p)?.into(), "out"))
}

/// `x^c` for a constant exponent.
///
/// # Safety
/// `out` must be null or valid for a write of one `FomohHyperDual`.
#[no_mangle]
pub unsafe extern "C" fn fomoh_hd_powf(x: FomohHyperDual, c: f64, out: *mut FomohHyperDual) -> FomohStatus {
    guard(|| write_out(out, HyperDual::from(x).unary(Primitive::Pow(c))?.into(), "out"))
}

/// Create the `dim`-dimensional Rosenbrock function.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_rosenbrock_new(dim: usize, out: *mut *mut FomohObjective) -> FomohStatus {
    guard(|| {
        let f = rosenbrock(dim)?;
        let h = Box::new(FomohObjective { inner: Inner::Rosenbrock(f) });
        write_out(out, Box::into_raw(h), "out")
    })
}

/// Create `½ θᵀAθ + bᵀθ` from a row-major symmetric `dim × dim` matrix `a`
/// and a length-`dim` vector `b`.
///
/// # Safety
/// `a` must point to `dim * dim` doubles, `b` to `dim` doubles, and `out`
/// must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_quadratic_new(
    dim: usize,
    a: *const f64,
    b: *const f64,
    out: *mut *mut FomohObjective,
) -> FomohStatus {
    guard(|| {
        let n =
            dim.checked_mul(dim).ok_or_else(|| Failure(FomohStatus::InvalidArgument, "dimension overflow".into()))?;
        let a = Array2::from_shape_vec((dim, dim), input(a, n, "a")?.to_vec())
            .map_err(|e| Failure(FomohStatus::InvalidArgument, e.to_string()))?;
        let b = Array1::from(input(b, dim, "b")?.to_vec());
        let f = Quadratic::new(a, b)?;
        let h = Box::new(FomohObjective { inner: Inner::Quadratic(f) });
        write_out(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from a `fomoh_*_new` objective constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_free(f: *mut FomohObjective) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Parameter dimension, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live objective handle.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_dim(f: *const FomohObjective) -> usize {
    f.as_ref().map_or(0, |f| f.get().dim())
}

/// # Safety
/// `f` must be a live objective handle, `theta` must point to `dim` doubles
/// and `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_value(
    f: *const FomohObjective,
    theta: *const f64,
    out: *mut f64,
) -> FomohStatus {
    guard(|| {
        let f = handle(f, "f")?.get();
        let v = f.value(input(theta, f.dim(), "theta")?)?;
        write_out(out, v, "out")
    })
}

/// Value and reverse-mode gradient; `grad` receives `dim` doubles.
///
/// # Safety
/// `f` must be a live objective handle, `theta` and `grad` must point to
/// `dim` doubles and `value` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_gradient(
    f: *const FomohObjective,
    theta: *const f64,
    value: *mut f64,
    grad: *mut f64,
) -> FomohStatus {
    guard(|| {
        let f = handle(f, "f")?.get();
        let (v, g) = f.value_and_grad(input(theta, f.dim(), "theta")?)?;
        output(grad, f.dim(), "grad")?.copy_from_slice(&g);
        write_out(value, v, "value")
    })
}

/// One hyper-dual evaluation along tangents `v1` and `v2`, giving the value,
/// both directional derivatives and `v1ᵀ∇²f v2`.
///
/// # Safety
/// `f` must be a live objective handle, `theta`, `v1` and `v2` must point to
/// `dim` doubles and `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_eval_hd(
    f: *const FomohObjective,
    theta: *const f64,
    v1: *const f64,
    v2: *const f64,
    out: *mut FomohHyperDual,
) -> FomohStatus {
    guard(|| {
        let f = handle(f, "f")?.get();
        let d = f.dim();
        let z = f.eval_hd(input(theta, d, "theta")?, input(v1, d, "v1")?, input(v2, d, "v2")?)?;
        write_out(out, z.into(), "out")
    })
}

/// Dense Hessian, row-major into `dim * dim` doubles.
///
/// # Safety
/// `f` must be a live objective handle, `theta` must point to `dim` doubles
/// and `hess` to `dim * dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fomoh_objective_hessian(
    f: *const FomohObjective,
    theta: *const f64,
    hess: *mut f64,
) -> FomohStatus {
    guard(|| {
        let f = handle(f, "f")?.get();
        let d = f.dim();
        let h = hessian_full(f, input(theta, d, "theta")?)?;
        output(hess, d * d, "hess")?.iter_mut().zip(h.iter()).for_each(|(o, x)| *o = *x);
        Ok(())
    })
}

/// Create an optimizer. `k` is the hyperplane dimension for
/// `FOMOH_METHOD_FOMOH_KD` and ignored otherwise; `seed` drives tangent
/// sampling.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_optimizer_new(
    method: FomohMethod,
    eta: f64,
    k: usize,
    seed: u64,
    out: *mut *mut FomohOptimizer,
) -> FomohStatus {
    guard(|| {
        let method = match method {
            FomohMethod::Fgd => Method::Fgd,
            FomohMethod::Fomoh => Method::Fomoh,
            FomohMethod::FomohBp => Method::FomohBp,
            FomohMethod::FomohKd => Method::FomohKd,
            FomohMethod::Sgd => Method::Sgd,
            FomohMethod::Newton => Method::Newton,
        };
        let config = OptimizerConfig::new(method, eta).with_k(k).with_seed(seed);
        let h = Box::new(FomohOptimizer { inner: Optimizer::new(config)? });
        write_out(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `opt` must be null or a live optimizer handle.
#[no_mangle]
pub unsafe extern "C" fn fomoh_optimizer_free(opt: *mut FomohOptimizer) {
    if !opt.is_null() {
        drop(Box::from_raw(opt));
    }
}

/// Apply one update to `theta` in place. `loss_before`, if non-null,
/// receives the loss at the incoming point.
///
/// # Safety
/// `opt` and `f` must be live handles, `theta` must point to `dim` writable
/// doubles and `loss_before` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fomoh_optimizer_step(
    opt: *mut FomohOptimizer,
    f: *const FomohObjective,
    theta: *mut f64,
    loss_before: *mut f64,
) -> FomohStatus {
    guard(|| {
        let opt = opt.as_mut().ok_or_else(|| null("opt"))?;
        let f = handle(f, "f")?.get();
        let theta = output(theta, f.dim(), "theta")?;
        let mut next = theta.to_vec();
        let report = opt.inner.step(f, &mut next)?;
        theta.copy_from_slice(&next);
        if !loss_before.is_null() {
            loss_before.write(report.loss_before);
        }
        Ok(())
    })
}
