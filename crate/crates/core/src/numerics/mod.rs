//! Special functions, one-dimensional quadrature and bracketed root finding.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod quadrature;
mod roots;

pub use bessel::{bessel_i0, bessel_i1, bessel_j0, bessel_k0, bessel_k1};
pub use quadrature::{gauss_legendre, integrate, integrate_tail, GaussLegendre, QuadratureSpec};
pub use roots::{solve_root_monotone, DEFAULT_BRACKET};
