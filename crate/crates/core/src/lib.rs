//! Linear complementarity problems with sufficient (P*) matrices.
//!
//! Given `M ∈ R^{n×n}` and `q ∈ R^n`, the linear complementarity problem
//! LCP(M, q) asks for a pair `(x, s)` with
//!
//! ```text
//!     -M x + s = q,      x >= 0,  s >= 0,  x' s = 0.
//! ```
//!
//! This crate is organized around the *handicap* of a matrix: the smallest
//! `κ >= 0` such that
//!
//! ```text
//!     x' M x + 4 κ Σ_{i ∈ I+(x)} x_i (Mx)_i >= 0      for all x,
//! ```
//!
//! where `I+(x) = { i : x_i (Mx)_i > 0 }`. Matrices with a finite handicap
//! are exactly the sufficient matrices, and interior-point methods solve
//! LCPs over them in time that grows with the handicap. The handicap is not
//! invariant under diagonal row scaling `M -> diag(d) M`, which leaves the
//! LCP essentially unchanged; the *optimized* handicap (infimum over row
//! scalings) can be exponentially smaller than the plain one. The solver
//! here exploits that: it searches the space of row scalings with a central
//! cut ellipsoid method, using interior-point failure certificates as
//! separating hyperplanes, so its runtime is governed by the optimized
//! handicap rather than the raw one.
//!
//! Module map:
//!
//! * [`numerics`] — sign partitions, pointwise handicap `κ̂(M, x)`,
//!   principal pivots, diagonal rescalings, PSD tests.
//! * [`rational`] — exact arithmetic: decimal-string parsing into
//!   `BigRational` and exact Gaussian elimination for small dimensions.
//! * [`duality`] — a dense two-phase simplex (Bland's rule), Farkas
//!   certificates, and the dual-LCP feasibility pre-check.
//! * [`polytope`] — vertex enumeration for the sign-constrained simplex
//!   polytopes `Q(M, I+, I-)`, vertex-magnitude bounds, Carathéodory
//!   decomposition.
//! * [`classes`] — matrix class verifiers (P, column/row sufficient,
//!   condition (C)) and handicap lower-bound search.
//! * [`ipa`] — a feasible interior-point algorithm that either solves the
//!   LCP or returns a vector certifying that the handicap exceeds a given
//!   threshold.
//! * [`ellipsoid`] — central-cut ellipsoid primitives.
//! * [`rescaling`] — the rescaling body `R(M, τ)`: sampled membership,
//!   separating cuts from certificates, stability and edge bounds,
//!   condensing of candidate rescalings.
//! * [`solver`] — the hybrid solver: duality pre-check, then an ellipsoid
//!   search over rescalings driving the interior-point algorithm.
//! * [`instances`] — instance/report file formats (decimal-string exact)
//!   and the instance generators.

#![warn(clippy::all)]
#![allow(clippy::needless_range_loop)]

pub mod classes;
pub mod duality;
pub mod ellipsoid;
mod error;
pub mod instances;
pub mod ipa;
pub mod numerics;
pub mod polytope;
pub mod rational;
pub mod rescaling;
pub mod solver;

pub use error::Error;
pub use ipa::LcpInstance;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Dense column-major `f64` matrix (square in almost all uses here).
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense `f64` column vector.
pub type Vector = nalgebra::DVector<f64>;
