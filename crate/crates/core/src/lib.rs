//! Simulation and statistics of STIT tessellations in bounded windows.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: convex cells, hyperplanes, half-open cuboids.
//! - [`measure`]: translation-invariant hyperplane measures, hitting masses
//!   and the hitting-hyperplane sampler.
//! - [`stit`]: the event-driven cell-division process and its text format.
//! - [`functionals`]: additive and subadditive functionals on cuboids.
//! - [`mixing`]: exact beta-mixing on finite partitions, covariance
//!   inequalities and empirical beta estimates for STIT.
//! - [`harness`]: Monte Carlo density, variance and ergodic scans.

pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod measure;
pub mod mixing;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod stit;
pub mod svg;

#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
