//! Goal-oriented a posteriori error control for the clamped Kirchhoff plate.
//!
//! The biharmonic problem is discretised with the C0 interior penalty method
//! on quadratic Lagrange elements. From each discrete solution the crate builds
//! an equilibrated Hellan–Herrmann–Johnson moment tensor and a C1
//! Hsieh–Clough–Tocher reconstruction, combines primal and dual quantities into
//! goal-error bounds and drives Dörfler-marked newest-vertex-bisection loops.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod adaptivity;
pub mod assembly;
pub mod benchmarks;
pub mod equilibration;
pub mod error;
pub mod estimators;
pub mod fespace;
pub mod mesh;
pub mod reconstruction;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{EdgeFrame, Mesh, Point};

/// Symmetric 2×2 tensors (hessians, moment tensors).
pub type Tensor = nalgebra::Matrix2<f64>;
