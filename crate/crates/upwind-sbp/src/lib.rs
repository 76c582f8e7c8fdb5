//! Dual-pair (upwind) summation-by-parts first-derivative operators on
//! grids whose near-boundary spacings are shifted, plus the machinery to
//! construct, optimize, and verify them.
//!
//! A pair (D+, D-) with diagonal norm H satisfies the summation-by-parts
//! identity (D+)^T H + H D- = diag(-1, 0, ..., 0, 1), mimicking integration
//! by parts. The interior stencils are the unique one-point-upwinded
//! difference formulas of order 2p; near each boundary, 2p rows of closure
//! coefficients and 2p norm weights are determined by accuracy conditions
//! up to a (p-1)^2-dimensional affine family. The free parameters are fixed
//! by minimizing a truncation-error functional under a spectral-radius
//! guard, and the resulting operators are verified on a wave equation with
//! a known reflected solution.
//!
//! Module map:
//! - [`stencil`]: exact interior coefficients from moment conditions
//! - [`grid`]: node layouts with shifted boundary spacings
//! - [`family`]: the affine family of boundary closures (exact arithmetic)
//! - [`operators`]: assembled matrices, the SBP identity check, JSON I/O
//! - [`tables`]: built-in grids and norm weights for the supported schemes
//! - [`spectra`]: interior symbol maxima and full-operator norms
//! - [`optim`]: truncation-error objective and derivative-free search
//! - [`wavesim`]: the Neumann wave verification problem
//! - [`report`]: run manifests and reproducible numeric formatting

pub mod dd;
pub mod error;
pub mod family;
pub mod grid;
pub mod operators;
pub mod optim;
pub mod report;
pub mod spectra;
pub mod stencil;
pub mod tables;
pub mod wavesim;

pub use error::{Error, Result};
