use serde::{Deserialize, Serialize};

use crate::mesh::LOCAL_EDGES;
use crate::Mesh;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityReport {
    pub min_dihedral: f64,
    pub max_dihedral: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub cells: usize,
    pub vertices: usize,
}

pub fn mesh_quality(mesh: &Mesh) -> MeshQualityReport {
    let mut min_d = f64::INFINITY;
    let mut max_d: f64 = 0.0;
    for t in 0..mesh.num_tets() {
        let p = mesh.tet_points(t);
        for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
            let (c, d) = (LOCAL_EDGES[5 - k].0, LOCAL_EDGES[5 - k].1);
            let e = (p[j] - p[i]).normalize();
            let u = p[c] - p[i];
            let v = p[d] - p[i];
            let u = u - e * e.dot(&u);
            let v = v - e * e.dot(&v);
            let ang = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
            min_d = min_d.min(ang);
            max_d = max_d.max(ang);
        }
    }
    let lengths = (0..mesh.num_edges()).map(|e| mesh.edge_vector(e).norm());
    let (min_e, max_e) = lengths.fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l), hi.max(l)));
    MeshQualityReport { min_dihedral: min_d, max_dihedral: max_d, min_edge: min_e, max_edge: max_e, cells: mesh.num_tets(), vertices: mesh.num_vertices() }
}
