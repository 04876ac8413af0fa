//! Random expression trees over the primitive registry, shared by the
//! property and acceptance suites.

#![allow(dead_code)]

use rand::Rng;

use fomoh::hyperdual::Primitive;
use fomoh::scalar::Scalar;
use fomoh::{Result, ScalarFn};

#[derive(Debug, Clone)]
pub enum Expr {
    Var(usize),
    Const(f64),
    Unary(Primitive, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval<S: Scalar>(&self, xs: &[S]) -> Result<S> {
        Ok(match self {
            Expr::Var(i) => xs[*i],
            Expr::Const(c) => S::constant(*c),
            Expr::Unary(p, a) => a.eval(xs)?.apply(*p)?,
            Expr::Add(a, b) => a.eval(xs)? + b.eval(xs)?,
            Expr::Mul(a, b) => a.eval(xs)? * b.eval(xs)?,
            Expr::Div(a, b) => a.eval(xs)?.try_div(b.eval(xs)?)?,
        })
    }

    /// Plain value plus the smallest distance of any intermediate from a
    /// kink, pole or domain edge. `None` if evaluation leaves the domain.
    pub fn margin(&self, xs: &[f64]) -> Option<(f64, f64)> {
        match self {
            Expr::Var(i) => Some((xs[*i], f64::INFINITY)),
            Expr::Const(c) => Some((*c, f64::INFINITY)),
            Expr::Unary(p, a) => {
                let (x, m) = a.margin(xs)?;
                if !p.in_domain(x) {
                    return None;
                }
                let edge = match p {
                    Primitive::Relu | Primitive::Abs | Primitive::Recip | Primitive::Log | Primitive::Sqrt => x.abs(),
                    Primitive::Pow(c) if c.fract() != 0.0 || *c < 0.0 => x.abs(),
                    _ => f64::INFINITY,
                };
                let y = p.eval(x).0;
                y.is_finite().then_some((y, m.min(edge)))
            }
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (x, ma) = a.margin(xs)?;
                let (y, mb) = b.margin(xs)?;
                let (z, edge) = match self {
                    Expr::Add(..) => (x + y, f64::INFINITY),
                    Expr::Mul(..) => (x * y, f64::INFINITY),
                    _ => (x / y, y.abs()),
                };
                z.is_finite().then_some((z, ma.min(mb).min(edge)))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// A random composition of registered primitives in `dim` variables.
pub fn random_expr<R: Rng>(rng: &mut R, dim: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.85) {
            Expr::Var(rng.random_range(0..dim))
        } else {
            Expr::Const(rng.random_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, dim, depth - 1));
    match rng.random_range(0..10) {
        0..=4 => {
            let p = Primitive::REGISTRY[rng.random_range(0..Primitive::REGISTRY.len())];
            Expr::Unary(p, sub(rng))
        }
        5 | 6 => Expr::Add(sub(rng), sub(rng)),
        7 | 8 => Expr::Mul(sub(rng), sub(rng)),
        _ => Expr::Div(sub(rng), sub(rng)),
    }
}

/// A random polynomial built from sums, products, squares and cubes.
pub fn random_poly<R: Rng>(rng: &mut R, dim: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.8) {
            Expr::Var(rng.random_range(0..dim))
        } else {
            Expr::Const(rng.random_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut R| Box::new(random_poly(rng, dim, depth - 1));
    match rng.random_range(0..6) {
        0 => Expr::Unary(Primitive::Pow(2.0), sub(rng)),
        1 => Expr::Unary(Primitive::Pow(3.0), sub(rng)),
        2 => Expr::Unary(Primitive::Neg, sub(rng)),
        3 => Expr::Add(sub(rng), sub(rng)),
        _ => Expr::Mul(sub(rng), sub(rng)),
    }
}

/// An expression bound to a dimension, usable as an objective.
#[derive(Debug, Clone)]
pub struct ExprFn {
    pub expr: Expr,
    pub dim: usize,
}

impl ScalarFn for ExprFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn call<S: Scalar>(&self, theta: &[S]) -> Result<S> {
        self.expr.eval(theta)
    }
}

pub fn axpy(x: &[f64], a: f64, v: &[f64], b: f64, u: &[f64]) -> Vec<f64> {
    x.iter().zip(v).zip(u).map(|((x, v), u)| x + a * v + b * u).collect()
}

/// `|a − b| / max(1, |b|)`
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
