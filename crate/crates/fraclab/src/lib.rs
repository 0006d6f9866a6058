//! Desk-scale numerical laboratory for the fractional Allen-Cahn equation
//! and nonlocal minimal-surface geometry in dimensions one and two.
//!
//! The crate discretizes the singular-integral fractional Laplacian on a
//! uniform truncated lattice with analytic exterior closures, minimizes the
//! associated Allen-Cahn energy under exterior Dirichlet data, computes
//! fractional perimeters, nonlocal mean curvatures and half-space extension
//! quantities, and ships the diagnostics (density monotonicity, clearing-out,
//! potential decay, level-set convergence, box-counting dimension) used to
//! probe the sharp-interface regime at desk scale.

pub mod error;
pub mod reduce;
pub mod params;
pub mod grid;
pub mod potential;
pub mod kernel;

pub use error::{Error, Result};
pub use grid::{build_grid, FarField, GridSpec, IndicatorSet, OmegaShape, ScalarField, TailSet};
pub use params::FractionalParams;
pub use potential::DoubleWell;
