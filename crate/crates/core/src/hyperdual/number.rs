use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Float;

use super::Primitive;
use crate::{Error, Result};

/// A hyper-dual number `re + e1·ε₁ + e2·ε₂ + e12·ε₁ε₂` with ε₁² = ε₂² = 0.
///
/// Arithmetic is the order-(1,1) truncation of the bivariate Taylor
/// expansion: seeding an input with tangents `v1`, `v2` yields `f`, `∇f·v1`,
/// `∇f·v2` and `v1ᵀ∇²f v2` in the four slots.
///
/// The component type defaults to `f64`; `f32` is used by the batched
/// tensor path for network training.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual<T = f64> {
    pub re: T,
    pub e1: T,
    pub e2: T,
    pub e12: T,
}

impl<T> HyperDual<T> {
    pub const fn new(re: T, e1: T, e2: T, e12: T) -> Self {
        HyperDual { re, e1, e2, e12 }
    }
}

impl<T: Float> HyperDual<T> {
    /// Constant with zero derivative parts. Does not validate finiteness.
    pub fn constant(re: T) -> Self {
        HyperDual::new(re, T::zero(), T::zero(), T::zero())
    }

    /// Lift a real into the hyper-dual ring.
    pub fn lift(x: T) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidValue(format!(
                "cannot lift non-finite value {}",
                x.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(HyperDual::constant(x))
    }

    /// Seed for a single coordinate: `θ + v1 ε₁ + v2 ε₂ + 0 ε₁ε₂`.
    pub fn seed(re: T, v1: T, v2: T) -> Self {
        HyperDual::new(re, v1, v2, T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.e1.is_finite() && self.e2.is_finite() && self.e12.is_finite()
    }

    /// Apply a registered univariate primitive via the chain rule
    /// `(f, f'·e1, f'·e2, f'·e12 + f''·e1·e2)`.
    pub fn unary(self, p: Primitive) -> Result<Self> {
        if !p.in_domain(self.re) {
            return Err(p.domain_error(self.re));
        }
        let (f, d1, d2) = p.eval(self.re);
        Ok(HyperDual::new(f, d1 * self.e1, d1 * self.e2, d1 * self.e12 + d2 * self.e1 * self.e2))
    }

    /// `self / rhs`, computed as `self · recip(rhs)`.
    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.re == T::zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self * rhs.unary(Primitive::Recip)?)
    }

    /// `self^exponent` for a hyper-dual exponent, as `exp(exponent · log(self))`.
    pub fn pow(self, exponent: Self) -> Result<Self> {
        (exponent * self.unary(Primitive::Log)?).unary(Primitive::Exp)
    }

    /// Orders by primal value only; derivative parts never affect branching.
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        self.re.partial_cmp(&other.re).ok_or(Error::Unordered)
    }
}

impl From<f64> for HyperDual<f64> {
    fn from(x: f64) -> Self {
        HyperDual::constant(x)
    }
}

impl<T: fmt::Display> fmt::Display for HyperDual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε₁ + {}ε₂ + {}ε₁ε₂", self.re, self.e1, self.e2, self.e12)
    }
}

impl<T: Float> Add for HyperDual<T> {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        HyperDual::new(self.re + rhs.re, self.e1 + rhs.e1, self.e2 + rhs.e2, self.e12 + rhs.e12)
    }
}

impl<T: Float> Sub for HyperDual<T> {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        HyperDual::new(self.re - rhs.re, self.e1 - rhs.e1, self.e2 - rhs.e2, self.e12 - rhs.e12)
    }
}

impl<T: Float> Mul for HyperDual<T> {
    type Output = Self;

    /// 9 products, 5 additions.
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        HyperDual::new(
            self.re * rhs.re,
            self.re * rhs.e1 + self.e1 * rhs.re,
            self.re * rhs.e2 + self.e2 * rhs.re,
            self.re * rhs.e12 + self.e12 * rhs.re + self.e1 * rhs.e2 + self.e2 * rhs.e1,
        )
    }
}

impl<T: Float> Mul<T> for HyperDual<T> {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: T) -> Self {
        HyperDual::new(self.re * rhs, self.e1 * rhs, self.e2 * rhs, self.e12 * rhs)
    }
}

impl<T: Float> Neg for HyperDual<T> {
    type Output = Self;

    #[inline]
    fn neg(self) -> Self {
        HyperDual::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl<T: Float> std::iter::Sum for HyperDual<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(HyperDual::constant(T::zero()), |acc, x| acc + x)
    }
}
