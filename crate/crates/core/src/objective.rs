//! Objective functions `f: ℝ^D → ℝ` as seen by the optimizers.

use ndarray::{Array2, ArrayD, IxDyn};

use crate::hyperdual::HyperDual;
use crate::reverse;
use crate::scalar::Scalar;
use crate::tensor::HdTensor;
use crate::{Error, Result};

/// A scalar function written once, generic over the scalar type.
///
/// Implementors automatically become an [`Objective`] evaluable over plain
/// reals, hyper-duals and the reverse-mode tape.
pub trait ScalarFn: Sync {
    fn dim(&self) -> usize;

    fn call<S: Scalar>(&self, theta: &[S]) -> Result<S>;
}

/// Everything an optimizer needs from a loss.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &[f64]) -> Result<f64>;

    /// Value and gradient from one reverse sweep.
    fn value_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Evaluate a stack of seeded inputs.
    ///
    /// `seeds` has shape `[N, D]`; row `n` holds `θ_n + V1[n] ε₁ + V2[n] ε₂`.
    /// Returns an `[N]` tensor of hyper-dual losses.
    fn eval_hd_batch(&self, seeds: &HdTensor<f64>) -> Result<HdTensor<f64>>;

    /// Single hyper-dual evaluation along `(v1, v2)`.
    fn eval_hd(&self, theta: &[f64], v1: &[f64], v2: &[f64]) -> Result<HyperDual> {
        let seeds = seed_batch(theta, &[v1], &[v2])?;
        let out = self.eval_hd_batch(&seeds)?;
        Ok(out.to_scalars()[0])
    }
}

fn check_len(what: &str, got: usize, dim: usize) -> Result<()> {
    if got != dim {
        return Err(Error::Shape(format!("{what} has length {got}, expected {dim}")));
    }
    Ok(())
}

/// Stack `θ` with tangent rows into an `[N, D]` seed tensor (zero ε₁ε₂ part).
pub fn seed_batch(theta: &[f64], v1: &[&[f64]], v2: &[&[f64]]) -> Result<HdTensor<f64>> {
    let d = theta.len();
    let n = v1.len();
    if v2.len() != n {
        return Err(Error::Shape(format!("{n} first tangents but {} second tangents", v2.len())));
    }
    for (a, b) in v1.iter().zip(v2) {
        check_len("tangent", a.len(), d)?;
        check_len("tangent", b.len(), d)?;
    }
    let re = Array2::from_shape_fn((n, d), |(_, j)| theta[j]);
    let e1 = Array2::from_shape_fn((n, d), |(i, j)| v1[i][j]);
    let e2 = Array2::from_shape_fn((n, d), |(i, j)| v2[i][j]);
    HdTensor::new(re.into_dyn(), e1.into_dyn(), e2.into_dyn(), ArrayD::zeros(IxDyn(&[n, d])))
}

impl<F: ScalarFn> Objective for F {
    fn dim(&self) -> usize {
        ScalarFn::dim(self)
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        check_len("theta", theta.len(), ScalarFn::dim(self))?;
        self.call(theta)
    }

    fn value_and_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_len("theta", theta.len(), ScalarFn::dim(self))?;
        reverse::grad(self, theta)
    }

    fn eval_hd(&self, theta: &[f64], v1: &[f64], v2: &[f64]) -> Result<HyperDual> {
        let d = ScalarFn::dim(self);
        check_len("theta", theta.len(), d)?;
        check_len("v1", v1.len(), d)?;
        check_len("v2", v2.len(), d)?;
        let x: Vec<HyperDual> = (0..d).map(|i| HyperDual::seed(theta[i], v1[i], v2[i])).collect();
        self.call(&x)
    }

    fn eval_hd_batch(&self, seeds: &HdTensor<f64>) -> Result<HdTensor<f64>> {
        let d = ScalarFn::dim(self);
        if seeds.ndim() != 2 || seeds.shape()[1] != d {
            return Err(Error::Shape(format!("seed batch must be [N, {d}], got {:?}", seeds.shape())));
        }
        let n = seeds.shape()[0];
        let flat = seeds.to_scalars();
        let out = flat.chunks(d.max(1)).take(n).map(|row| self.call(row)).collect::<Result<Vec<_>>>()?;
        HdTensor::from_scalars(&[n], &out)
    }
}
