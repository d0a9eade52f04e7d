//! Weighted persistent-homology sums of random point clouds.
//!
//! For a finite point set `X` and a homology degree `i`, the weighted sum
//!
//! ```text
//! E_α^i(X) = Σ_{(b,d) ∈ PH_i(X)} (d − b)^α
//! ```
//!
//! is taken over the reduced persistent homology of the Čech filtration of `X`.
//! For `i = 0` this is `2^{−α}` times the α-weight of the minimal spanning tree.
//! The crate samples point clouds from several measure families, builds
//! filtrations (alpha in the plane, brute-force Čech, Vietoris–Rips), reduces
//! them to barcodes, and fits the growth exponent of `E_α^i` against sample size.
//!
//! All filtration values use radius units: a simplex enters at the smallest
//! ball radius `ε` for which it appears, so an edge of length `ℓ` in a Čech or
//! Rips complex has value `ℓ / 2`.
//!
//! Module map:
//!
//! * [`geometry`] point clouds, metrics, distance matrices, bi-Lipschitz maps
//! * [`sampling`] seeded i.i.d. samplers
//! * [`complexes`] Rips, Delaunay/alpha and Čech filtrations
//! * [`persistence`] barcodes, MST and boundary-matrix reduction
//! * [`statistics`] weighted sums, regressions and bound probes
//! * [`harness`] experiment configuration, Monte Carlo runs and reports

pub mod complexes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod persistence;
pub mod sampling;
pub mod statistics;

pub use error::{Error, Result};
