//! Complex special functions underlying every density formula:
//! log-Gamma, digamma, Riemann zeta (with pole-subtracted companion and
//! derivative), prime zeta, and integer-order Bessel J.
//!
//! All operations are pure and stateless.

mod bessel;
mod gamma;
mod zeta;

pub use bessel::{bessel_j, MAX_ORDER};
pub use gamma::{digamma, ln_gamma, ln_gamma_real, EULER_GAMMA};
pub use zeta::{prime_zeta, prime_zeta_tail, zeta, zeta_deriv, zeta_minus_pole};
