//! Quick oracle checks behind the `check` subcommand.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hyperdual::{hessian_full, HyperDual, Primitive};
use crate::models::{init_params, logistic_regression, rosenbrock, DatasetBatch, Precision, Quadratic};
use crate::optim::{fomoh_kd_update, JitterPolicy};
use crate::reverse::jvp_crosscheck;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn interior<R: Rng>(p: Primitive, rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random_range(-2.0..2.0);
        let kink = matches!(p, Primitive::Relu | Primitive::Abs) && x.abs() < 1e-3;
        let pole = matches!(p, Primitive::Recip | Primitive::Pow(_)) && x.abs() < 0.2;
        if p.in_domain(x) && !kink && !pole && !(matches!(p, Primitive::Log | Primitive::Sqrt) && x < 0.2) {
            return x;
        }
    }
}

fn taylor(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for p in Primitive::REGISTRY {
        for _ in 0..20 {
            let x = interior(p, rng);
            let z = HyperDual::seed(x, 1.0, 1.0).unary(p)?;
            let f = |t: f64| p.eval(t).0;
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (p.eval(x + h).1 - p.eval(x - h).1) / (2.0 * h);
            let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
            worst = worst.max(rel(z.e1, d1)).max(rel(z.e2, d1)).max(rel(z.e12, d2));
        }
    }
    Ok(CheckResult { name: "taylor", passed: worst < 1e-5, detail: format!("max rel err {worst:.2e}") })
}

fn hessian_oracle(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for d in [2, 5, 10] {
        let f = rosenbrock(d)?;
        for _ in 0..20 {
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let diff = &hessian_full(&f, &theta)? - &f.analytic_hessian(&theta);
            worst = worst.max(diff.iter().fold(0.0, |m, x| m.max(x.abs())));
        }
    }
    Ok(CheckResult { name: "hessian", passed: worst < 1e-8, detail: format!("max abs err {worst:.2e}") })
}

fn newton_equivalence(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let d = 6;
    let m = Array2::from_shape_simple_fn((d, d), || rng.random_range(-1.0..1.0));
    let a = m.t().dot(&m) + Array2::<f64>::eye(d);
    let b = Array1::from_shape_simple_fn(d, || rng.random_range(-1.0..1.0));
    let f = Quadratic::new(a.clone(), b.clone())?;
    let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let v = Array2::from_shape_simple_fn((d, d), || rng.random_range(-1.0..1.0));
    let (next, _) = fomoh_kd_update(&f, &theta, 1.0, &v, &JitterPolicy::default())?;
    let grad = |x: &[f64]| a.dot(&Array1::from(x.to_vec())) + &b;
    let residual = grad(&next).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(CheckResult {
        name: "newton-equivalence", passed: residual < 1e-8, detail: format!("‖∇f(θ')‖∞ {residual:.2e}")
    })
}

fn jvp(rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let net = logistic_regression();
    let x = Array2::from_shape_simple_fn((8, 784), || rng.random_range(0.0..1.0));
    let labels = (0..8).map(|i| i % 10).collect();
    let batch = DatasetBatch::new(x, labels)?;
    let f = net.objective(&batch, Precision::F64);
    let theta = init_params(&net, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v: Vec<f64> = (0..net.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (fwd, rev) = jvp_crosscheck(&f, &theta, &v)?;
        worst = worst.max((fwd - rev).abs() / (1.0 + fwd.abs()));
    }
    let r = rosenbrock(3)?;
    let (fwd, rev) = jvp_crosscheck(&r, &[-1.0, 1.0, 0.5], &[0.3, -0.2, 1.0])?;
    worst = worst.max((fwd - rev).abs() / (1.0 + fwd.abs()));
    Ok(CheckResult { name: "jvp", passed: worst < 1e-9, detail: format!("max rel gap {worst:.2e}") })
}

/// Run every check with a fixed seed.
pub fn run_checks() -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    Ok(vec![taylor(&mut rng)?, hessian_oracle(&mut rng)?, newton_equivalence(&mut rng)?, jvp(&mut rng)?])
}
