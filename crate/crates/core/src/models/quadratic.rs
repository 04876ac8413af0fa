use ndarray::{Array1, Array2};

use crate::objective::ScalarFn;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// `f(θ) = ½ θᵀAθ + bᵀθ` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: Array2<f64>,
    b: Array1<f64>,
}

impl Quadratic {
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        let (r, c) = a.dim();
        if r != c || b.len() != r || r == 0 {
            return Err(Error::Shape(format!("A is {r}×{c}, b has length {}", b.len())));
        }
        if a.iter().zip(a.t().iter()).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs())) {
            return Err(Error::Config("quadratic form matrix must be symmetric".into()));
        }
        Ok(Quadratic { a, b })
    }

    /// `½ θᵀAθ`, no linear term.
    pub fn homogeneous(a: Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        Quadratic::new(a, Array1::zeros(n))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn linear(&self) -> &Array1<f64> {
        &self.b
    }
}

impl ScalarFn for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn call<S: Scalar>(&self, theta: &[S]) -> Result<S> {
        let half = S::constant(0.5);
        let mut total = S::constant(0.0);
        for (i, &ti) in theta.iter().enumerate() {
            let mut row = S::constant(0.0);
            for (j, &tj) in theta.iter().enumerate() {
                if self.a[[i, j]] != 0.0 {
                    row = row + S::constant(self.a[[i, j]]) * tj;
                }
            }
            total = total + half * ti * row + S::constant(self.b[i]) * ti;
        }
        Ok(total)
    }
}
