//! Hyperplane sections and projections of `l_p^n` unit balls.
//!
//! The crate evaluates the normalized section function `A_{n,p}(a)` and the
//! normalized projection function `P_{n,q}(a)` through their Fourier-type
//! integral representations, cross-checks them with an independent Monte
//! Carlo estimator, and locates the critical exponents and dimension
//! thresholds at which the main diagonal overtakes `a^{(2)}`.

pub mod analysis;
pub mod error;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod volumes;
pub mod specfun;

pub use error::{Error, Result};
