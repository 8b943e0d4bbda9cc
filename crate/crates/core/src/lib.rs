//! Lowest-order Whitney-form toolkit for the two generalized div-curl systems
//!
//! * magnetostatic type: `curl(σu) = J`, `div u = ρ`, `u·n = λ`
//! * electric type: `curl u = J`, `div(εu) = ρ`, `u×n = Λ`
//!
//! on tetrahedral meshes of multiply connected domains. The crate provides
//! the harmonic-field bases of both null spaces, compatibility checks on the
//! data, constructive solvers, the two weighted Helmholtz-Weyl splittings and
//! discrete Friedrichs constants.

pub mod compat;
pub mod decompose;
pub mod error;
pub mod friedrichs;
pub mod geometry;
pub mod harmonic;
pub mod linsolve;
pub mod mesh;
pub mod presets;
pub mod solve;
pub mod sparse;
pub mod whitney;

pub use error::{Error, Result};
pub use mesh::{CutSurface, Mesh, Primitive};
pub use sparse::SparseMatrix;
pub use whitney::{CoefficientField, DofVector, FormDegree, Weight};

/// 3D point / vector type used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Symmetric 3×3 coefficient values.
pub type Mat3 = nalgebra::Matrix3<f64>;
