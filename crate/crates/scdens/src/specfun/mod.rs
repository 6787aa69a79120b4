//! Special functions and quadrature used throughout the crate: Gamma,
//! Bessel J (integer/half-integer) with zero finders, modified Bessel
//! K_0/K_1, and tolerance-driven adaptive integration.

mod bessel;
mod gamma;
mod quad;

pub use bessel::{
    bessel_j, bessel_j_over_pow, bessel_j_prime, bessel_j_zero, bessel_j_zeros_upto, bessel_k0,
    bessel_k1, sph_bessel_j, sph_bessel_j_prime, sph_bessel_zero, sph_bessel_zeros_upto,
};
pub use gamma::gamma_fn;
pub use quad::{integrate, integrate_from_neg_inf, integrate_split, integrate_to_inf, QuadResult, QuadratureSpec};
