//! Lossless quantum data compression under a mismatched source model.
//!
//! The true source is ρ₀ but the codec is built for a believed source
//! σ₀. This crate simulates the projection-based compression protocol
//! whose achieved rate is the quantum cross entropy S(ρ₀,σ₀):
//! exact small-N runs with Uhlmann fidelity, and seeded Monte Carlo
//! mass estimates at large N.
//!
//! Modules:
//! - [`linalg`]: dense complex Hermitian eigendecomposition, matrix
//!   functions, Kronecker products, fidelity.
//! - [`typicality`]: classical strong/weak typical sets, enumeration,
//!   Monte Carlo mass.
//! - [`coding`]: Shannon lengths, canonical prefix codes, Kraft checks,
//!   entropy and cross-entropy rates.
//! - [`protocol`]: the mismatched-source compression protocol itself.
//! - [`experiments`]: config, CSV export, and the runners behind the
//!   `qxcomp` CLI.

pub mod coding;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod typicality;

pub use error::{Error, Result};
