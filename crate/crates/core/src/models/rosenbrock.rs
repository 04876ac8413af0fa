use ndarray::Array2;

use crate::objective::ScalarFn;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// `f(θ) = Σ_{i<D} 100 (θ_{i+1} − θ_i²)² + (1 − θ_i)²`, minimum `f(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rosenbrock {
    dim: usize,
}

pub fn rosenbrock(d: usize) -> Result<Rosenbrock> {
    if d < 2 {
        return Err(Error::Config(format!("Rosenbrock needs dimension ≥ 2, got {d}")));
    }
    Ok(Rosenbrock { dim: d })
}

impl Rosenbrock {
    pub fn analytic_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut g = vec![0.0; d];
        for i in 0..d - 1 {
            let (x, y) = (theta[i], theta[i + 1]);
            g[i] += -400.0 * x * (y - x * x) - 2.0 * (1.0 - x);
            g[i + 1] += 200.0 * (y - x * x);
        }
        g
    }

    /// Tridiagonal analytic Hessian.
    pub fn analytic_hessian(&self, theta: &[f64]) -> Array2<f64> {
        let d = self.dim;
        let mut h = Array2::zeros((d, d));
        for i in 0..d - 1 {
            let (x, y) = (theta[i], theta[i + 1]);
            h[[i, i]] += 1200.0 * x * x - 400.0 * y + 2.0;
            h[[i + 1, i + 1]] += 200.0;
            h[[i, i + 1]] += -400.0 * x;
            h[[i + 1, i]] += -400.0 * x;
        }
        h
    }
}

impl ScalarFn for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }

    fn call<S: Scalar>(&self, theta: &[S]) -> Result<S> {
        let hundred = S::constant(100.0);
        let one = S::constant(1.0);
        let mut total = S::constant(0.0);
        for w in theta.windows(2) {
            let (x, y) = (w[0], w[1]);
            total = total + hundred * (y - x.square()).square() + (one - x).square();
        }
        Ok(total)
    }
}
