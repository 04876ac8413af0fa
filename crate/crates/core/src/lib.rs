//! Second-order forward-mode automatic differentiation with hyper-dual
//! numbers, and the FoMoH family of optimizers built on it.

mod error;

pub mod harness;
pub mod hyperdual;
pub mod models;
pub mod objective;
pub mod optim;
pub mod reverse;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use hyperdual::HyperDual;
pub use objective::{Objective, ScalarFn};
pub use tensor::HdTensor;
