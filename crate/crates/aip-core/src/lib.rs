//! Construction and analysis of coefficient matrices for finite-dimensional
//! abstract interpolation problems.
//!
//! The pipeline: problem data (Nevanlinna–Pick, boundary, or Sarason type)
//! → Gram space and isometry → universal unitary colligation → coefficient
//! matrix S → linear-fractional solution family, with verification of the
//! structural properties (norm equality, residual spectral defects,
//! boundary derivatives, inner/outer structure, dense-set criteria) by
//! direct computation and circle quadrature.

pub mod boundary;
pub mod circle;
pub mod colligation;
pub mod error;
pub mod linalg;
pub mod parametrization;
pub mod problems;
pub mod residual;
pub mod sampling;
pub mod sarason;

pub use error::{AipError, Result};
pub use linalg::{C64, CMatrix, CVector};
