//! Certification toolkit for the sharp extension inequality from the circle
//! to the plane under arithmetic constraints on the spectrum.
//!
//! Modules:
//! - [`sets`]: exact P(h)/B_h checks, enumeration, greedy and generated sets.
//! - [`bessel`]: Bessel functions, zeros of J_1 and the pointwise bounds.
//! - [`quadrature`]: truncated zero-sum quadrature for sextuple Bessel
//!   integrals and an adaptive integration oracle.
//! - [`certifier`]: analytic thresholds and numerical checks for the
//!   sextuple integral inequalities.
//! - [`extension`]: extension norms of finite-spectrum functions.

pub mod bessel;
pub mod certifier;
pub mod config;
pub mod error;
pub mod extension;
pub mod integrate;
pub mod quadrature;
pub mod sets;

pub use config::{Config, OutputFormat};
pub use error::{Error, Result};
