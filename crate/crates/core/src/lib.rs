//! Numerical toolkit for studying spatial discretizations of expanding circle
//! maps: what happens to the dynamics of `x -> 2x + c1 sin(2 pi x) + c2 sin(4 pi x) + shift`
//! when it is forced onto a uniform grid of `N` points.
//!
//! The crate is organized around that question:
//!
//! * [`expanding_map`] — the two-parameter analytic map family, its branch
//!   inverses and orbit derivatives;
//! * [`grid`] — uniform grids, rounding projections, and the six rounding
//!   schemes used to push measures/particles through a grid;
//! * [`measure`] — measures on the circle and exact circle-distance
//!   computations (quadratic/Cramér distance, Wasserstein-1);
//! * [`transfer`] — collocation discretization of the transfer operator,
//!   invariant densities and the short-term discrepancy predictor;
//! * [`predictions`] — rate-of-injectivity limits and local preimage-count
//!   statistics (mean densities, generating polynomials, point-process
//!   discrepancy formulas);
//! * [`orbits`] — functional-graph decomposition of a discretized map and the
//!   asymptotic (Cesàro) measure of its grid orbits.
//!
//! Everything is deterministic given explicit RNG state; nothing here touches
//! global RNGs, files, or threads other than data-parallel loops.

pub mod expanding_map;
pub mod grid;
pub mod measure;
pub mod orbits;
pub mod predictions;
pub mod transfer;

mod util;

pub use expanding_map::{CirclePoint, MapParams};
pub use grid::DiscretizedMap;
pub use measure::{GridMeasure, PiecewiseDensity};

/// Errors shared by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// Map parameters violate the expansivity bound `2 pi |c1| + 4 pi |c2| < 1`.
    #[error("parameters (c1={c1}, c2={c2}) are not uniformly expanding: 2pi|c1| + 4pi|c2| = {excess} >= 1")]
    NotExpanding { c1: f64, c2: f64, excess: f64 },

    /// A branch inversion failed to reach the requested residual.
    #[error("branch inversion for target {target} stalled at residual {residual} (tol {tol})")]
    Convergence { target: f64, residual: f64, tol: f64 },

    /// Power iteration did not settle within the iteration cap.
    #[error("power iteration did not converge within {max_iter} iterations (last sup-change {last_change})")]
    NoConvergence { max_iter: usize, last_change: f64 },

    /// Two grid-indexed objects of different sizes were combined.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An operation was called on a state it cannot act on.
    #[error("invalid state: {0}")]
    InvalidState(String),
}
