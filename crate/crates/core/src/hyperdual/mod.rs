//! Hyper-dual number algebra and the derivative queries built on it.

mod eval;
mod number;
mod primitive;

pub use eval::{
    eval_fn_hd, extract_hessian_element, hessian_full, hessian_full_capped, hvp_forward, Directional, HESSIAN_CAP,
};
pub use number::HyperDual;
pub use primitive::Primitive;
