use crate::{Error, Mesh, Result};

/// V − E + F − T of the tet complex.
pub fn euler_characteristic(mesh: &Mesh) -> i64 {
    mesh.num_vertices() as i64 - mesh.num_edges() as i64 + mesh.num_faces() as i64 - mesh.num_tets() as i64
}

/// (N1, N2) = (boundary components − 1, number of cuts).
///
/// The cuts are cross-checked against the first Betti number of the complex,
/// b1 = 1 + N1 − χ for a connected 3-manifold with boundary, and the cut-open
/// domain must stay connected.
pub fn betti_counts(mesh: &Mesh) -> Result<(usize, usize)> {
    let n1 = mesh.boundary_components().len() - 1;
    let n2 = mesh.cuts().len();
    let b1 = 1 + n1 as i64 - euler_characteristic(mesh);
    if b1 < 0 || b1 as usize != n2 {
        return Err(Error::Cohomology { cuts: n2, betti1: b1.max(0) as usize });
    }
    let removed: Vec<usize> = mesh.cuts().iter().flat_map(|c| c.faces.iter().copied()).collect();
    if mesh.cell_components(&removed) != 1 {
        return Err(Error::Topology("cut surfaces disconnect the domain".into()));
    }
    Ok((n1, n2))
}
