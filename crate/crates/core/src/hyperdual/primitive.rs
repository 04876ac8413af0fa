//! Registry of univariate primitives with closed-form first and second
//! derivatives. Every elementwise nonlinearity in the crate goes through
//! this table, so the chain rule lives in exactly one place.

use num_traits::Float;

/// A univariate primitive `f` together with `f'`, `f''` and a domain predicate.
///
/// Kink conventions: `relu` and `abs` use derivative 0 at exactly 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Neg,
    Recip,
    Exp,
    Log,
    Sqrt,
    /// `x^c` for a constant exponent `c`.
    Pow(f64),
    Tanh,
    Sigmoid,
    Relu,
    Abs,
    Sin,
    Cos,
}

impl Primitive {
    /// All registered primitives, with representative exponents for `Pow`.
    pub const REGISTRY: [Primitive; 14] = [
        Primitive::Neg,
        Primitive::Recip,
        Primitive::Exp,
        Primitive::Log,
        Primitive::Sqrt,
        Primitive::Pow(2.0),
        Primitive::Pow(3.0),
        Primitive::Pow(-1.5),
        Primitive::Tanh,
        Primitive::Sigmoid,
        Primitive::Relu,
        Primitive::Abs,
        Primitive::Sin,
        Primitive::Cos,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Neg => "neg",
            Primitive::Recip => "recip",
            Primitive::Exp => "exp",
            Primitive::Log => "log",
            Primitive::Sqrt => "sqrt",
            Primitive::Pow(_) => "pow",
            Primitive::Tanh => "tanh",
            Primitive::Sigmoid => "sigmoid",
            Primitive::Relu => "relu",
            Primitive::Abs => "abs",
            Primitive::Sin => "sin",
            Primitive::Cos => "cos",
        }
    }

    /// Look up a primitive by name. `pow` is not addressable by name alone.
    pub fn by_name(name: &str) -> Option<Primitive> {
        Self::REGISTRY.iter().copied().find(|p| p.name() == name && !matches!(p, Primitive::Pow(_)))
    }

    pub fn in_domain<T: Float>(&self, x: T) -> bool {
        if !x.is_finite() {
            return false;
        }
        match *self {
            Primitive::Recip => x != T::zero(),
            Primitive::Log | Primitive::Sqrt => x > T::zero(),
            Primitive::Pow(c) => {
                if c.fract() != 0.0 {
                    x > T::zero()
                } else if c < 2.0 {
                    // x^c, x^(c-1) or x^(c-2) has a negative integer power
                    c == 0.0 || c == 1.0 || x != T::zero()
                } else {
                    true
                }
            }
            _ => true,
        }
    }

    /// Returns `(f(x), f'(x), f''(x))`. The caller checks the domain.
    pub fn eval<T: Float>(&self, x: T) -> (T, T, T) {
        let zero = T::zero();
        let one = T::one();
        let two = one + one;
        match *self {
            Primitive::Neg => (-x, -one, zero),
            Primitive::Recip => {
                let r = one / x;
                (r, -r * r, two * r * r * r)
            }
            Primitive::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            Primitive::Log => {
                let r = one / x;
                (x.ln(), r, -r * r)
            }
            Primitive::Sqrt => {
                let s = x.sqrt();
                let d1 = one / (two * s);
                (s, d1, -d1 / (two * x))
            }
            Primitive::Pow(c) => {
                let ct = T::from(c).unwrap();
                let f = x.powf(ct);
                let d1 = if c == 0.0 { zero } else { ct * x.powf(ct - one) };
                let d2 = if c == 0.0 || c == 1.0 { zero } else { ct * (ct - one) * x.powf(ct - two) };
                (f, d1, d2)
            }
            Primitive::Tanh => {
                let t = x.tanh();
                let d1 = one - t * t;
                (t, d1, -two * t * d1)
            }
            Primitive::Sigmoid => {
                let s = if x >= zero {
                    one / (one + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (one + e)
                };
                let d1 = s * (one - s);
                (s, d1, d1 * (one - two * s))
            }
            Primitive::Relu => {
                if x > zero {
                    (x, one, zero)
                } else {
                    (zero, zero, zero)
                }
            }
            Primitive::Abs => {
                let d1 = if x > zero {
                    one
                } else if x < zero {
                    -one
                } else {
                    zero
                };
                (x.abs(), d1, zero)
            }
            Primitive::Sin => (x.sin(), x.cos(), -x.sin()),
            Primitive::Cos => (x.cos(), -x.sin(), -x.cos()),
        }
    }

    /// Plain-real application with domain checking.
    pub fn apply_real<T: Float>(&self, x: T) -> crate::Result<T> {
        if !self.in_domain(x) {
            return Err(self.domain_error(x));
        }
        Ok(self.eval(x).0)
    }

    pub(crate) fn domain_error<T: Float>(&self, x: T) -> crate::Error {
        crate::Error::Domain { primitive: self.name(), input: x.to_f64().unwrap_or(f64::NAN) }
    }
}
