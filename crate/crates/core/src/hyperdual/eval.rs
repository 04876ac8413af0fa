use ndarray::Array2;

use crate::objective::{seed_batch, Objective};
use crate::{Error, Result};

/// Default largest dimension for which dense Hessians are formed.
pub const HESSIAN_CAP: usize = 256;

/// Output of one hyper-dual pass along `(v1, v2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Directional {
    /// `f(θ)`
    pub value: f64,
    /// `∇f·v1`
    pub dd1: f64,
    /// `∇f·v2`
    pub dd2: f64,
    /// `v1ᵀ ∇²f v2`
    pub curv: f64,
}

/// Evaluate `f(θ + v1 ε₁ + v2 ε₂)` and read off value, both directional
/// derivatives and the mixed curvature term.
pub fn eval_fn_hd(f: &dyn Objective, theta: &[f64], v1: &[f64], v2: &[f64]) -> Result<Directional> {
    let out = f.eval_hd(theta, v1, v2)?;
    Ok(Directional { value: out.re, dd1: out.e1, dd2: out.e2, curv: out.e12 })
}

fn basis(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

pub fn extract_hessian_element(f: &dyn Objective, theta: &[f64], i: usize, j: usize) -> Result<f64> {
    let d = theta.len();
    for idx in [i, j] {
        if idx >= d {
            return Err(Error::IndexOutOfBounds { index: idx, dim: d });
        }
    }
    Ok(eval_fn_hd(f, theta, &basis(d, i), &basis(d, j))?.curv)
}

fn check_cap(d: usize, cap: usize) -> Result<()> {
    if d > cap {
        return Err(Error::SizeCap { dim: d, cap });
    }
    Ok(())
}

/// Dense Hessian from `D(D+1)/2` basis-pair evaluations (upper triangle,
/// mirrored), run as one batched pass.
pub fn hessian_full(f: &dyn Objective, theta: &[f64]) -> Result<Array2<f64>> {
    hessian_full_capped(f, theta, HESSIAN_CAP)
}

pub fn hessian_full_capped(f: &dyn Objective, theta: &[f64], cap: usize) -> Result<Array2<f64>> {
    let d = theta.len();
    check_cap(d, cap)?;
    let e: Vec<Vec<f64>> = (0..d).map(|i| basis(d, i)).collect();
    let pairs = crate::tensor::pair_layout(d);
    let v1: Vec<&[f64]> = pairs.iter().map(|&(i, _)| e[i].as_slice()).collect();
    let v2: Vec<&[f64]> = pairs.iter().map(|&(_, j)| e[j].as_slice()).collect();
    let out = f.eval_hd_batch(&seed_batch(theta, &v1, &v2)?)?.to_scalars();
    let mut h = Array2::zeros((d, d));
    for (&(i, j), z) in pairs.iter().zip(out) {
        h[[i, j]] = z.e12;
        h[[j, i]] = z.e12;
    }
    Ok(h)
}

/// `∇²f(θ)·w` from `D` passes with `v1 = w`, `v2 = e_j`.
pub fn hvp_forward(f: &dyn Objective, theta: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let d = theta.len();
    check_cap(d, HESSIAN_CAP)?;
    if w.len() != d {
        return Err(Error::Shape(format!("w has length {}, expected {d}", w.len())));
    }
    let e: Vec<Vec<f64>> = (0..d).map(|i| basis(d, i)).collect();
    let v1: Vec<&[f64]> = vec![w; d];
    let v2: Vec<&[f64]> = e.iter().map(|x| x.as_slice()).collect();
    let out = f.eval_hd_batch(&seed_batch(theta, &v1, &v2)?)?;
    Ok(out.to_scalars().iter().map(|z| z.e12).collect())
}
