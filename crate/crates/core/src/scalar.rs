//! The scalar abstraction objective functions are written against, so a
//! single definition evaluates over plain reals, hyper-duals, and tape
//! variables.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::hyperdual::{HyperDual, Primitive};
use crate::{Error, Result};

pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// A constant carrying no derivative information.
    fn constant(x: f64) -> Self;

    fn primal(&self) -> f64;

    fn apply(self, p: Primitive) -> Result<Self>;

    fn try_div(self, rhs: Self) -> Result<Self>;

    fn exp(self) -> Result<Self> {
        self.apply(Primitive::Exp)
    }

    fn ln(self) -> Result<Self> {
        self.apply(Primitive::Log)
    }

    fn sqrt(self) -> Result<Self> {
        self.apply(Primitive::Sqrt)
    }

    fn tanh(self) -> Result<Self> {
        self.apply(Primitive::Tanh)
    }

    fn powc(self, c: f64) -> Result<Self> {
        self.apply(Primitive::Pow(c))
    }

    fn square(self) -> Self {
        self * self
    }

    /// Non-constant exponent, via `exp(exponent · ln(self))`.
    fn pow(self, exponent: Self) -> Result<Self> {
        (exponent * self.ln()?).exp()
    }
}

impl Scalar for f64 {
    fn constant(x: f64) -> Self {
        x
    }

    fn primal(&self) -> f64 {
        *self
    }

    fn apply(self, p: Primitive) -> Result<Self> {
        p.apply_real(self)
    }

    fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs == 0.0 {
            return Err(Error::DivisionByZero);
        }
        // same rounding as the hyper-dual route, which multiplies by recip
        Ok(self * (1.0 / rhs))
    }
}

impl Scalar for HyperDual {
    fn constant(x: f64) -> Self {
        HyperDual::constant(x)
    }

    fn primal(&self) -> f64 {
        self.re
    }

    fn apply(self, p: Primitive) -> Result<Self> {
        self.unary(p)
    }

    fn try_div(self, rhs: Self) -> Result<Self> {
        self.checked_div(rhs)
    }
}
