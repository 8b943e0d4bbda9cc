//! Lowest-order Whitney forms: P1 (vertices), NED (edges), RT (faces), P0 (cells).
//!
//! Entities are oriented by ascending vertex id. NED values are circulations
//! along a→b, RT values are fluxes along the face orientation normal
//! (x_j − x_i)×(x_k − x_i), P0 values are cell averages (indicator basis, so
//! the P0 mass is diag(volume) and `div` returns cell-integrated divergence).

mod assembly;
mod coeff;
mod interp;
mod trace;

use serde::{Deserialize, Serialize};

use crate::{Error, Mesh, Result};

pub use assembly::{incidence, local_ned, local_rt, mass_matrix, mixed_mass, stiffness, Incidence};
pub use coeff::{CoefficientField, Weight};
pub use interp::{face_fluxes_from_cells, interpolate, interpolate_scalar, interpolate_vector, l2_error, scalar_at, vector_at, Field};
pub use trace::{boundary_flux, cut_flux, surface_divergence, trace_normal, trace_tangential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormDegree {
    P1,
    Ned,
    Rt,
    P0,
}

impl FormDegree {
    pub fn dim(self, mesh: &Mesh) -> usize {
        match self {
            FormDegree::P1 => mesh.num_vertices(),
            FormDegree::Ned => mesh.num_edges(),
            FormDegree::Rt => mesh.num_faces(),
            FormDegree::P0 => mesh.num_tets(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FormDegree::P1 => "P1",
            FormDegree::Ned => "NED",
            FormDegree::Rt => "RT",
            FormDegree::P0 => "P0",
        }
    }
}

/// Coefficients of a Whitney form. Values are indexed by the entity list of
/// the degree; the mesh is passed alongside wherever it is needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofVector {
    pub degree: FormDegree,
    pub values: Vec<f64>,
}

impl DofVector {
    pub fn new(degree: FormDegree, values: Vec<f64>) -> Self {
        DofVector { degree, values }
    }

    pub fn zeros(degree: FormDegree, mesh: &Mesh) -> Self {
        DofVector { degree, values: vec![0.0; degree.dim(mesh)] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Check degree and length against a mesh.
    pub fn check(&self, mesh: &Mesh, degree: FormDegree) -> Result<()> {
        if self.degree != degree {
            return Err(Error::Degenerate(format!("expected a {} field, got {}", degree.name(), self.degree.name())));
        }
        let n = degree.dim(mesh);
        if self.values.len() != n {
            return Err(Error::Dimension { expected: n, got: self.values.len() });
        }
        Ok(())
    }

    pub fn axpy(&mut self, alpha: f64, other: &DofVector) {
        assert_eq!(self.degree, other.degree);
        crate::sparse::axpy(alpha, &other.values, &mut self.values);
    }

    pub fn scaled(&self, s: f64) -> DofVector {
        DofVector { degree: self.degree, values: crate::sparse::scaled(&self.values, s) }
    }
}
