//! Multivariate refinable functions with integer dilation matrices.
//!
//! A problem is an integer dilation matrix `M` together with a finitely
//! supported mask `{c_q}`; the associated scaling function solves
//! `φ(x) = m·Σ_q c_q·φ(Mx − q)` with `m = |det M|`.
//!
//! The crate provides
//! - exact and numerical matrix analysis ([`linalg`]),
//! - problem ingestion and validation ([`mask`]),
//! - a-priori support bounds ([`bounds`]),
//! - the cascade iteration on refinement lattices ([`cascade`]),
//! - values of `φ` on `{M⁻ʲk}` by the transfer-matrix eigenvector method
//!   ([`pointwise`]).

pub mod bounds;
pub mod cascade;
pub mod lattice;
pub mod linalg;
pub mod mask;
pub mod pointwise;
pub mod samples;

pub use bounds::{BoundError, Provenance, Region, SupportBound};
pub use cascade::{CascadeError, InitialFunctionKind, SampledFunction};
pub use lattice::{IntBox, LatticeGrid, RefinementKernel};
pub use linalg::{IntMatrix, LinalgError, RationalMatrix};
pub use mask::{parse_problem, DilationMatrix, Mask, Problem, ProblemError};
pub use pointwise::{PointwiseError, TransferMatrix, ValueTable};
