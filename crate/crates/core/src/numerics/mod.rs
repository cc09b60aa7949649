//! Special functions and quadrature.

mod quadrature;
mod special;

pub use quadrature::{integrate, try_integrate, Integral, QuadratureSpec, SemiInfiniteMap};
pub use special::{
    bessel_k, bessel_k1, dilog, erfc, gamma_fn, ln_gamma, regularized_upper_gamma,
    upper_incomplete_gamma,
};
