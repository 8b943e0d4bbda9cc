use crate::geometry::{barycentric_gradients, tet_point, TET_DEG2};
use crate::mesh::LOCAL_EDGES;
use crate::whitney::{CoefficientField, FormDegree, Weight};
use crate::{Error, Mat3, Mesh, Result, SparseMatrix, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incidence {
    Grad,
    Curl,
    Div,
}

/// Signed incidence matrix: P1→NED (grad), NED→RT (curl), RT→P0 (div).
pub fn incidence(mesh: &Mesh, which: Incidence) -> SparseMatrix {
    match which {
        Incidence::Grad => SparseMatrix::from_triplets(mesh.num_edges(), mesh.num_vertices(), mesh.edges().iter().enumerate().flat_map(|(e, &[a, b])| [(e, a, -1.0), (e, b, 1.0)])),
        Incidence::Curl => SparseMatrix::from_triplets(mesh.num_faces(), mesh.num_edges(), (0..mesh.num_faces()).flat_map(|f| mesh.face_edges_signed(f).map(|(e, s)| (f, e, s)))),
        Incidence::Div => SparseMatrix::from_triplets(
            mesh.num_tets(),
            mesh.num_faces(),
            (0..mesh.num_tets()).flat_map(|t| (0..4).map(move |k| (t, mesh.tet_faces(t)[k], mesh.tet_face_signs(t)[k]))),
        ),
    }
}

/// Values of the six global NED basis functions of cell `t` at barycentric point `lam`.
pub fn local_ned(mesh: &Mesh, t: usize, grads: &[Vec3; 4], lam: &[f64; 4]) -> [Vec3; 6] {
    let tet = mesh.tets()[t];
    let mut out = [Vec3::zeros(); 6];
    for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
        let w = grads[j] * lam[i] - grads[i] * lam[j];
        out[k] = if tet[i] < tet[j] { w } else { -w };
    }
    out
}

/// Values of the four global RT basis functions of cell `t` at point `x`,
/// ordered like `mesh.tet_faces(t)`.
pub fn local_rt(mesh: &Mesh, t: usize, p: &[Vec3; 4], x: &Vec3) -> [Vec3; 4] {
    let s = mesh.tet_face_signs(t);
    let c = 1.0 / (3.0 * mesh.volume(t));
    [0, 1, 2, 3].map(|k| (x - p[k]) * (s[k] * c))
}

fn weight_at(coeff: &CoefficientField, mesh: &Mesh, t: usize, x: &Vec3, w: Weight) -> Option<Mat3> {
    (w != Weight::Identity && !coeff.is_identity()).then(|| coeff.eval_weighted(mesh, t, x, w))
}

fn apply(m: &Option<Mat3>, v: &Vec3) -> Vec3 {
    match m {
        Some(a) => a * v,
        None => *v,
    }
}

/// Galerkin mass matrix of a Whitney space, weighted by the coefficient (or
/// its inverse) for the vector spaces. Scalar spaces accept identity weighting only.
pub fn mass_matrix(mesh: &Mesh, degree: FormDegree, coeff: &CoefficientField, w: Weight) -> Result<SparseMatrix> {
    let weighted = w != Weight::Identity && !coeff.is_identity();
    if weighted {
        if matches!(degree, FormDegree::P1 | FormDegree::P0) {
            return Err(Error::Coefficient(format!("{} mass takes no matrix coefficient", degree.name())));
        }
        coeff.bounds(mesh)?;
    }
    let n = degree.dim(mesh);
    let mut trip = Vec::new();
    match degree {
        FormDegree::P0 => trip.extend((0..n).map(|t| (t, t, mesh.volume(t)))),
        FormDegree::P1 => {
            for (t, tet) in mesh.tets().iter().enumerate() {
                let v = mesh.volume(t);
                for i in 0..4 {
                    for j in 0..4 {
                        trip.push((tet[i], tet[j], if i == j { v / 10.0 } else { v / 20.0 }));
                    }
                }
            }
        }
        FormDegree::Ned | FormDegree::Rt => {
            for t in 0..mesh.num_tets() {
                let p = mesh.tet_points(t);
                let g = barycentric_gradients(&p);
                let ids: Vec<usize> = if degree == FormDegree::Ned { mesh.tet_edges(t).to_vec() } else { mesh.tet_faces(t).to_vec() };
                let mut local = [[0.0; 6]; 6];
                for (b, qw) in TET_DEG2.points.iter().zip(TET_DEG2.weights) {
                    let x = tet_point(&p, b);
                    let vals: Vec<Vec3> = if degree == FormDegree::Ned { local_ned(mesh, t, &g, b).to_vec() } else { local_rt(mesh, t, &p, &x).to_vec() };
                    let a = weight_at(coeff, mesh, t, &x, w);
                    let wv = qw * mesh.volume(t);
                    for i in 0..vals.len() {
                        let ai = apply(&a, &vals[i]);
                        for j in 0..vals.len() {
                            local[i][j] += wv * ai.dot(&vals[j]);
                        }
                    }
                }
                for i in 0..ids.len() {
                    for j in 0..ids.len() {
                        trip.push((ids[i], ids[j], local[i][j]));
                    }
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, trip))
}

/// Mixed mass K[e, f] = ∫ W φ_e · ψ_f between NED (rows) and RT (columns).
pub fn mixed_mass(mesh: &Mesh, coeff: &CoefficientField, w: Weight) -> Result<SparseMatrix> {
    if w != Weight::Identity && !coeff.is_identity() {
        coeff.bounds(mesh)?;
    }
    let mut trip = Vec::with_capacity(24 * mesh.num_tets());
    for t in 0..mesh.num_tets() {
        let p = mesh.tet_points(t);
        let g = barycentric_gradients(&p);
        let mut local = [[0.0; 4]; 6];
        for (b, qw) in TET_DEG2.points.iter().zip(TET_DEG2.weights) {
            let x = tet_point(&p, b);
            let ned = local_ned(mesh, t, &g, b);
            let rt = local_rt(mesh, t, &p, &x);
            let a = weight_at(coeff, mesh, t, &x, w);
            let wv = qw * mesh.volume(t);
            for i in 0..6 {
                let ai = apply(&a, &ned[i]);
                for j in 0..4 {
                    local[i][j] += wv * ai.dot(&rt[j]);
                }
            }
        }
        for i in 0..6 {
            for j in 0..4 {
                trip.push((mesh.tet_edges(t)[i], mesh.tet_faces(t)[j], local[i][j]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(mesh.num_edges(), mesh.num_faces(), trip))
}

/// Weighted P1 stiffness Gᵀ M_NED G.
pub fn stiffness(mesh: &Mesh, coeff: &CoefficientField, w: Weight) -> Result<SparseMatrix> {
    let g = incidence(mesh, Incidence::Grad);
    Ok(mass_matrix(mesh, FormDegree::Ned, coeff, w)?.congruence(&g))
}
