//! Numerical laboratory for Euclidean random fields driven by generalized
//! (Lévy) white noise.
//!
//! The library builds scalar fields φ = L⁻¹η on periodic lattices, where
//! L = (−Δ + m²)^α and η is an infinitely divisible site noise, and checks
//! everything that is finitely checkable about the resulting theory:
//!
//! * closed-form moment (Schwinger) functions from set-partition cumulant
//!   combinatorics, against Monte Carlo estimates ([`montecarlo`]),
//! * the momentum-space truncated Wightman densities and their spectral
//!   support, hermiticity, Lorentz invariance and positivity ([`wightman`]),
//! * the two-point analytic-continuation identity connecting the Euclidean
//!   covariance to the relativistic mass-shell measure,
//! * Schwartz-norm continuity bounds and the majorizing measures behind the
//!   Hilbert-space-structure condition ([`hsc`]).

pub mod ensemble;
pub mod error;
pub mod fracop;
pub mod hsc;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod partitions;
pub mod quad;
pub mod report;
pub mod schwinger;
pub mod testfn;
pub mod util;
pub mod wightman;

pub use error::Error;

/// Crate version string embedded in machine reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
