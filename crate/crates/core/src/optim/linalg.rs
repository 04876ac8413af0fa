//! Small dense solves for the subspace and Newton systems.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Diagonal jitter escalation used when a curvature system is singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JitterPolicy {
    /// Initial jitter, scaled by `max(1, ‖H‖∞)`.
    pub jitter0: f64,
    pub growth: f64,
    pub max_retries: u32,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy { jitter0: 1e-6, growth: 10.0, max_retries: 6 }
    }
}

impl JitterPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.jitter0 > 0.0 && self.jitter0.is_finite()) {
            return Err(Error::Config(format!("jitter0 must be positive, got {}", self.jitter0)));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(Error::Config(format!("jitter growth must exceed 1, got {}", self.growth)));
        }
        Ok(())
    }
}

/// Solution of a jittered solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub x: Vec<f64>,
    /// Jitter on the diagonal of the system that was finally solved (0 if none).
    pub jitter: f64,
    pub retries: u32,
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &Array2<f64>) -> f64 {
    a.outer_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU with partial pivoting. `None` when a pivot is negligible relative to
/// `‖A‖∞` or anything turns non-finite.
pub fn lu_solve(a: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.dim(), (n, n), "system must be square and match the right-hand side");
    let norm = inf_norm(a);
    if !norm.is_finite() || b.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let tiny = norm.max(f64::MIN_POSITIVE) * n as f64 * f64::EPSILON;
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs())).unwrap();
        if m[[p, col]].abs() <= tiny {
            return None;
        }
        if p != col {
            for k in 0..n {
                m.swap([p, k], [col, k]);
            }
            x.swap(p, col);
        }
        let pivot = m[[col, col]];
        for r in col + 1..n {
            let factor = m[[r, col]] / pivot;
            if factor != 0.0 {
                for k in col..n {
                    m[[r, k]] -= factor * m[[col, k]];
                }
                x[r] -= factor * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for k in r + 1..n {
            s -= m[[r, k]] * x[k];
        }
        x[r] = s / m[[r, r]];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solve `A x = b`, retrying with escalating diagonal jitter on failure.
pub fn solve_with_jitter(a: &Array2<f64>, b: &[f64], policy: &JitterPolicy) -> Result<Solved> {
    if let Some(x) = lu_solve(a, b) {
        return Ok(Solved { x, jitter: 0.0, retries: 0 });
    }
    let mut jitter = policy.jitter0 * inf_norm(a).max(1.0);
    for retry in 1..=policy.max_retries {
        let mut shifted = a.clone();
        shifted.diag_mut().mapv_inplace(|d| d + jitter);
        if let Some(x) = lu_solve(&shifted, b) {
            return Ok(Solved { x, jitter, retries: retry });
        }
        jitter *= policy.growth;
    }
    Err(Error::Singular { retries: policy.max_retries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_small_system() {
        let a = array![[4.0, 1.0], [1.0, 3.0]];
        let x = lu_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn pivots_on_zero_leading_entry() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(lu_solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn indefinite_is_fine() {
        let a = array![[1.0, 0.0], [0.0, -2.0]];
        let s = solve_with_jitter(&a, &[1.0, 1.0], &JitterPolicy::default()).unwrap();
        assert_eq!(s.x, vec![1.0, -0.5]);
        assert_eq!(s.retries, 0);
    }

    #[test]
    fn singular_gets_jitter() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let s = solve_with_jitter(&a, &[1.0, 1.0], &JitterPolicy::default()).unwrap();
        assert_eq!(s.retries, 1);
        assert_eq!(s.jitter, 2e-6);
    }

    #[test]
    fn gives_up_after_retries() {
        let a = array![[f64::NAN, 0.0], [0.0, 1.0]];
        let err = solve_with_jitter(&a, &[1.0, 1.0], &JitterPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::Singular { retries: 6 }));
    }
}
