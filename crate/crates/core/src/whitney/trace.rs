use crate::whitney::{DofVector, FormDegree};
use crate::{Error, Mesh, Result};

/// Outward normal component per boundary face (flux / area), ordered like
/// `mesh.boundary_faces()`.
pub fn trace_normal(mesh: &Mesh, v: &DofVector) -> Result<Vec<f64>> {
    v.check(mesh, FormDegree::Rt)?;
    Ok(mesh.boundary_faces().iter().map(|&f| v.values[f] * mesh.outward_sign(f) / mesh.face_area(f)).collect())
}

/// Circulation per boundary edge, ordered like `mesh.boundary_edges()`.
/// These are also the circulations of the tangential part n×(v×n).
pub fn trace_tangential(mesh: &Mesh, v: &DofVector) -> Result<Vec<f64>> {
    v.check(mesh, FormDegree::Ned)?;
    Ok(mesh.boundary_edges().iter().map(|&e| v.values[e]).collect())
}

/// Weak surface divergence of Λ = u×n, given by the boundary-edge
/// circulations `lam` of n×Λ, as a functional on boundary hat functions
/// (ordered like `mesh.boundary_vertices()`). For a discrete field this is
/// ⟨curl u·n, ψ_v⟩ on ∂Ω.
pub fn surface_divergence(mesh: &Mesh, lam: &[f64]) -> Result<Vec<f64>> {
    if lam.len() != mesh.boundary_edges().len() {
        return Err(Error::Dimension { expected: mesh.boundary_edges().len(), got: lam.len() });
    }
    let bverts = mesh.boundary_vertices();
    let mut slot = vec![usize::MAX; mesh.num_vertices()];
    bverts.iter().enumerate().for_each(|(i, &v)| slot[v] = i);
    let mut out = vec![0.0; bverts.len()];
    for &f in mesh.boundary_faces() {
        let circ: f64 = mesh.face_edges_signed(f).iter().map(|&(e, c)| c * lam[mesh.boundary_edge_slot(e).unwrap()]).sum();
        let share = circ * mesh.outward_sign(f) / 3.0;
        for &v in &mesh.faces()[f] {
            out[slot[v]] += share;
        }
    }
    Ok(out)
}

/// Signed flux of an RT field through Σ_j along n_j (1-based `j`).
pub fn cut_flux(mesh: &Mesh, v: &DofVector, j: usize) -> Result<f64> {
    v.check(mesh, FormDegree::Rt)?;
    let cut = mesh.cut(j)?;
    Ok(cut.faces.iter().zip(&cut.signs).map(|(&f, s)| s * v.values[f]).sum())
}

/// Outward flux of an RT field through boundary component Γ_i.
pub fn boundary_flux(mesh: &Mesh, v: &DofVector, i: usize) -> Result<f64> {
    v.check(mesh, FormDegree::Rt)?;
    let comps = mesh.boundary_components();
    let comp = comps.get(i).ok_or(Error::BadId { index: i, count: comps.len() })?;
    Ok(comp.iter().map(|&f| mesh.outward_sign(f) * v.values[f]).sum())
}
