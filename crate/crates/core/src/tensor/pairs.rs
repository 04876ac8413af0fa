use ndarray::Array2;

use crate::objective::{seed_batch, Objective};
use crate::{Error, Result};

/// Subspace quantities from one vectorized pass over all tangent pairs.
#[derive(Debug, Clone)]
pub struct TangentPairs {
    /// `f(θ)`
    pub value: f64,
    /// Projected gradient, `G̃[i] = ∇f·v_i`.
    pub grad: Vec<f64>,
    /// Projected Hessian, `H̃[i][j] = v_iᵀ ∇²f v_j`, symmetric by construction.
    pub hessian: Array2<f64>,
    /// False when any output component was NaN or infinite.
    pub finite: bool,
}

/// Canonical pair enumeration: `(i, j)` for `i ≤ j`, row-major.
/// Length is `(K² + K) / 2`.
pub fn pair_layout(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect()
}

/// Evaluate `f` once over the stack of all `N = (K²+K)/2` tangent pairs built
/// from the rows of `tangents` (shape `[K, D]`) and assemble `G̃` and `H̃`.
pub fn batch_eval_tangent_pairs(f: &dyn Objective, theta: &[f64], tangents: &Array2<f64>) -> Result<TangentPairs> {
    let (k, d) = tangents.dim();
    if k == 0 {
        return Err(Error::Shape("need at least one tangent".into()));
    }
    if d != theta.len() || d != f.dim() {
        return Err(Error::Shape(format!(
            "tangents are [{k}, {d}] but θ has length {} and f has dimension {}",
            theta.len(),
            f.dim()
        )));
    }
    let rows: Vec<Vec<f64>> = tangents.outer_iter().map(|r| r.to_vec()).collect();
    let layout = pair_layout(k);
    let v1: Vec<&[f64]> = layout.iter().map(|&(i, _)| rows[i].as_slice()).collect();
    let v2: Vec<&[f64]> = layout.iter().map(|&(_, j)| rows[j].as_slice()).collect();
    let seeds = seed_batch(theta, &v1, &v2)?;
    let z = f.eval_hd_batch(&seeds)?.to_scalars();

    let mut grad = vec![0.0; k];
    let mut hessian = Array2::zeros((k, k));
    let mut l = 0;
    for i in 0..k {
        grad[i] = z[l].e1;
        for j in i..k {
            hessian[[i, j]] = z[l].e12;
            hessian[[j, i]] = z[l].e12;
            l += 1;
        }
    }
    let finite = z.iter().all(|h| h.is_finite());
    Ok(TangentPairs { value: z[0].re, grad, hessian, finite })
}
