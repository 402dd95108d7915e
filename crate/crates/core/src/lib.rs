//! Numerical laboratory for the 1-level density of holomorphic newform
//! families.
//!
//! Two independent computations of the same quantity are provided and
//! compared at desk scale:
//! - an arithmetic prediction assembled from a functional-equation factor,
//!   zeta factors and a rapidly convergent Euler product ([`ratios`]);
//! - an explicit-formula evaluation over Hecke eigenvalue data ([`ntside`]),
//!   with the Petersson/Kloosterman machinery ([`petersson`]) as the bridge
//!   between the two.
//!
//! Supporting layers: special functions ([`specfun`]), admissible test
//! functions with compactly supported Fourier transform ([`testfn`]),
//! prime sieves and prime-indexed sums ([`primes`]), Euler products
//! ([`eulerprod`]), the functional-equation factor ([`gammafactor`]), and
//! eigenvalue data sources ([`data`]).

pub mod budget;
pub mod data;
pub mod error;
pub mod eulerprod;
pub mod gammafactor;
pub mod ntside;
pub mod petersson;
pub mod primes;
pub mod quad;
pub mod ratios;
pub mod specfun;
pub mod testfn;

pub use budget::{EvalAccuracy, PrecisionBudget, TailEstimate, TailKind};
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
