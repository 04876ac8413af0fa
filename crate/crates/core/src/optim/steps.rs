//! Individual update rules. Each returns the new parameters together with a
//! [`StepReport`]; a rejected step leaves `θ` unchanged.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{solve_with_jitter, JitterPolicy};
use super::StepReport;
use crate::hyperdual::hessian_full;
use crate::objective::Objective;
use crate::tensor::batch_eval_tangent_pairs;
use crate::{Error, Result};

/// Default floor on `|vᵀHv|` in the line-search denominators.
pub const CURV_FLOOR: f64 = 1e-12;

pub fn sample_tangents<R: Rng + ?Sized>(rng: &mut R, k: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((k, d), || rng.sample(StandardNormal))
}

fn sample_tangent<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("learning rate must be positive, got {eta}")));
    }
    Ok(())
}

fn check_dim(f: &dyn Objective, theta: &[f64], what: &str, len: usize) -> Result<()> {
    if theta.len() != f.dim() || len != f.dim() {
        return Err(Error::Shape(format!(
            "θ has length {}, {what} has length {len}, objective has dimension {}",
            theta.len(),
            f.dim()
        )));
    }
    Ok(())
}

/// `θ + s·u`, with the norm of the applied displacement.
fn axpy(theta: &[f64], s: f64, u: &[f64]) -> (Vec<f64>, f64) {
    let mut norm = 0.0;
    let next = theta
        .iter()
        .zip(u)
        .map(|(t, x)| {
            let dx = s * x;
            norm += dx * dx;
            t + dx
        })
        .collect();
    (next, norm.sqrt())
}

fn rejected(theta: &[f64], loss_before: f64) -> (Vec<f64>, StepReport) {
    (theta.to_vec(), StepReport { loss_before, rejected: true, ..StepReport::default() })
}

/// Forward gradient descent along a given tangent: `θ − η (∇f·v) v`.
pub fn fgd_update(f: &dyn Objective, theta: &[f64], eta: f64, v: &[f64]) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    check_dim(f, theta, "tangent", v.len())?;
    let zero = vec![0.0; v.len()];
    let z = f.eval_hd(theta, v, &zero)?;
    if !(z.re.is_finite() && z.e1.is_finite()) {
        return Ok(rejected(theta, z.re));
    }
    let (next, norm) = axpy(theta, -eta * z.e1, v);
    Ok((next, StepReport { loss_before: z.re, direction_norm: norm, ..StepReport::default() }))
}

pub fn fgd_step<R: Rng + ?Sized>(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, StepReport)> {
    let v = sample_tangent(rng, theta.len());
    fgd_update(f, theta, eta, &v)
}

/// Curvature-normalized line search along a given tangent:
/// `θ − η (∇f·v / max(|vᵀHv|, floor)) v`.
pub fn fomoh_update(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    curv_floor: f64,
    v: &[f64],
) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    check_dim(f, theta, "tangent", v.len())?;
    let z = f.eval_hd(theta, v, v)?;
    if !z.is_finite() {
        return Ok(rejected(theta, z.re));
    }
    let scale = z.e1 / z.e12.abs().max(curv_floor);
    let (next, norm) = axpy(theta, -eta * scale, v);
    Ok((next, StepReport { loss_before: z.re, direction_norm: norm, kappa: vec![-scale], ..StepReport::default() }))
}

/// FoMoH with a sampled tangent; a non-finite evaluation is retried once
/// with a fresh tangent before the step is rejected.
pub fn fomoh_step<R: Rng + ?Sized>(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    curv_floor: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, StepReport)> {
    let v = sample_tangent(rng, theta.len());
    let first = fomoh_update(f, theta, eta, curv_floor, &v)?;
    if !first.1.rejected {
        return Ok(first);
    }
    let v = sample_tangent(rng, theta.len());
    let (next, mut report) = fomoh_update(f, theta, eta, curv_floor, &v)?;
    report.resampled = true;
    Ok((next, report))
}

/// Line search along the reverse-mode gradient.
pub fn fomoh_bp_step(f: &dyn Objective, theta: &[f64], eta: f64, curv_floor: f64) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    let (loss, g) = f.value_and_grad(theta)?;
    let gg: f64 = g.iter().map(|x| x * x).sum();
    if !loss.is_finite() || !gg.is_finite() {
        return Ok(rejected(theta, loss));
    }
    if gg == 0.0 {
        return Ok((theta.to_vec(), StepReport { loss_before: loss, converged: true, ..StepReport::default() }));
    }
    let z = f.eval_hd(theta, &g, &g)?;
    if !z.e12.is_finite() {
        return Ok(rejected(theta, loss));
    }
    let scale = gg / z.e12.abs().max(curv_floor);
    let (next, norm) = axpy(theta, -eta * scale, &g);
    Ok((next, StepReport { loss_before: loss, direction_norm: norm, kappa: vec![-scale], ..StepReport::default() }))
}

/// Hyperplane step over the span of the rows of `tangents` (`[K, D]`):
/// solve `H̃κ = −G̃` and move by `η Σ κ_k v_k`.
pub fn fomoh_kd_update(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    tangents: &Array2<f64>,
    policy: &JitterPolicy,
) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    let (k, d) = tangents.dim();
    check_dim(f, theta, "tangent", d)?;
    if k == 0 || k > d {
        return Err(Error::Config(format!("hyperplane dimension K={k} must satisfy 1 ≤ K ≤ D={d}")));
    }
    let pairs = batch_eval_tangent_pairs(f, theta, tangents)?;
    if !pairs.finite {
        return Ok(rejected(theta, pairs.value));
    }
    let rhs: Vec<f64> = pairs.grad.iter().map(|g| -g).collect();
    let solved = match solve_with_jitter(&pairs.hessian, &rhs, policy) {
        Ok(s) => s,
        Err(Error::Singular { retries }) => {
            let (t, mut r) = rejected(theta, pairs.value);
            r.retries = retries;
            return Ok((t, r));
        }
        Err(e) => return Err(e),
    };
    let mut dir = vec![0.0; d];
    for (kappa, v) in solved.x.iter().zip(tangents.outer_iter()) {
        for (acc, x) in dir.iter_mut().zip(v) {
            *acc += kappa * x;
        }
    }
    let (next, norm) = axpy(theta, eta, &dir);
    Ok((
        next,
        StepReport {
            loss_before: pairs.value,
            direction_norm: norm,
            kappa: solved.x,
            jitter_used: solved.jitter,
            retries: solved.retries,
            ..StepReport::default()
        },
    ))
}

pub fn fomoh_kd_step<R: Rng + ?Sized>(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    k: usize,
    policy: &JitterPolicy,
    rng: &mut R,
) -> Result<(Vec<f64>, StepReport)> {
    let v = sample_tangents(rng, k, theta.len());
    let first = fomoh_kd_update(f, theta, eta, &v, policy)?;
    if !first.1.rejected || first.1.retries > 0 {
        return Ok(first);
    }
    let v = sample_tangents(rng, k, theta.len());
    let (next, mut report) = fomoh_kd_update(f, theta, eta, &v, policy)?;
    report.resampled = true;
    Ok((next, report))
}

/// Dense Newton step `θ − η H⁻¹∇f` with the full forward-mode Hessian.
pub fn newton_step(
    f: &dyn Objective,
    theta: &[f64],
    eta: f64,
    policy: &JitterPolicy,
) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    let h = hessian_full(f, theta)?;
    let (loss, g) = f.value_and_grad(theta)?;
    if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
        return Ok(rejected(theta, loss));
    }
    let solved = match solve_with_jitter(&h, &g, policy) {
        Ok(s) => s,
        Err(Error::Singular { retries }) => {
            let (t, mut r) = rejected(theta, loss);
            r.retries = retries;
            return Ok((t, r));
        }
        Err(e) => return Err(e),
    };
    let (next, norm) = axpy(theta, -eta, &solved.x);
    Ok((
        next,
        StepReport {
            loss_before: loss,
            direction_norm: norm,
            jitter_used: solved.jitter,
            retries: solved.retries,
            ..StepReport::default()
        },
    ))
}

/// Plain gradient descent, `θ − η∇f`.
pub fn sgd_step(f: &dyn Objective, theta: &[f64], eta: f64) -> Result<(Vec<f64>, StepReport)> {
    check_eta(eta)?;
    let (loss, g) = f.value_and_grad(theta)?;
    if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
        return Ok(rejected(theta, loss));
    }
    let (next, norm) = axpy(theta, -eta, &g);
    Ok((next, StepReport { loss_before: loss, direction_norm: norm, converged: norm == 0.0, ..StepReport::default() }))
}
