//! Bases of the harmonic fields K_{T,σ} (magnetic) and K_{N,ε} (electric).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::geometry::barycentric_gradients;
use crate::linsolve::{cg_solve, minres, saddle_preconditioner, SolveStats, SolverConfig};
use crate::mesh::{betti_counts, NONE};
use crate::sparse::{dot, SparseMatrix};
use crate::whitney::{face_fluxes_from_cells, incidence, local_ned, mass_matrix, stiffness, CoefficientField, DofVector, FormDegree, Incidence, Weight};
use crate::{Error, Mesh, Result};

pub use crate::whitney::{boundary_flux, cut_flux};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Magnetic,
    Electric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    pub kind: BasisKind,
    /// RT fields (magnetic) or NED gradients (electric).
    pub fields: Vec<DofVector>,
    /// gram[k][j] = flux of member j through Σ_{k+1} (magnetic) or Γ_{k+1} (electric).
    pub gram: Vec<Vec<f64>>,
    /// Electric only: flux of each member through Γ_0 (expected −1).
    pub gamma0_flux: Vec<f64>,
    /// Electric only: the P1 potentials q_i (zero on Γ_0) with fields = ∇q_i.
    pub potentials: Vec<DofVector>,
    pub coefficient: String,
    pub stats: SolveStats,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// max |gram − I|.
    pub fn gram_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for (k, row) in self.gram.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                e = e.max((v - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        e
    }
}

/// Discrete Θ: functions q = p + Σ c_j θ_j on the cut-open domain, with p in
/// P1 and θ_j equal to 1 on the + copy of each Σ_j vertex and 0 elsewhere.
/// This is the vertex-duplication space with the per-cut jump eliminated;
/// all jumps zero recovers P1.
#[derive(Clone, Debug)]
pub struct JumpSpace {
    /// Edge cochain of ∇⁰θ_j for each cut.
    pub cochains: Vec<Vec<f64>>,
}

fn vertex_tets(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut vt = vec![Vec::new(); mesh.num_vertices()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        for &v in tet {
            vt[v].push(t);
        }
    }
    vt
}

impl JumpSpace {
    pub fn new(mesh: &Mesh) -> Result<JumpSpace> {
        let vt = vertex_tets(mesh);
        let mut cochains = Vec::with_capacity(mesh.cuts().len());
        for cut in mesh.cuts() {
            let mut in_cut = vec![false; mesh.num_faces()];
            cut.faces.iter().for_each(|&f| in_cut[f] = true);
            // theta[t][local vertex] = 1 on the + side of a cut vertex
            let mut theta = vec![[0.0f64; 4]; mesh.num_tets()];
            let mut cut_vertices: Vec<usize> = cut.faces.iter().flat_map(|&f| mesh.faces()[f]).collect();
            cut_vertices.sort_unstable();
            cut_vertices.dedup();
            let mut plus_at: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
            for (&f, &t) in cut.faces.iter().zip(&cut.plus_tets) {
                for &v in &mesh.faces()[f] {
                    plus_at.entry(v).or_insert(t);
                }
            }
            for &v in &cut_vertices {
                let star = &vt[v];
                let side = star_side(mesh, v, star, &in_cut, plus_at[&v], cut.id)?;
                for (&t, &plus) in star.iter().zip(&side) {
                    if plus {
                        let l = mesh.tets()[t].iter().position(|&w| w == v).unwrap();
                        theta[t][l] = 1.0;
                    }
                }
            }
            let mut edge_in_cut = vec![false; mesh.num_edges()];
            cut.faces.iter().flat_map(|&f| mesh.face_edges(f)).for_each(|e| edge_in_cut[e] = true);
            let mut z = vec![f64::NAN; mesh.num_edges()];
            for t in 0..mesh.num_tets() {
                let tet = mesh.tets()[t];
                for (k, &(i, j)) in crate::mesh::LOCAL_EDGES.iter().enumerate() {
                    let d = if tet[i] < tet[j] { theta[t][j] - theta[t][i] } else { theta[t][i] - theta[t][j] };
                    let e = mesh.tet_edges(t)[k];
                    let d = if edge_in_cut[e] { 0.0 } else { d };
                    if z[e].is_nan() {
                        z[e] = d;
                    } else if z[e] != d {
                        return Err(Error::Topology(format!("cut sigma{} is not two-sided near edge {:?}", cut.id, mesh.edges()[e])));
                    }
                }
            }
            cochains.push(z);
        }
        Ok(JumpSpace { cochains })
    }

    pub fn dim(&self, mesh: &Mesh) -> usize {
        mesh.num_vertices() + self.cochains.len()
    }

    /// Edge cochain of ∇⁰(p + Σ c_j θ_j).
    pub fn gradient(&self, mesh: &Mesh, p: &[f64], jumps: &[f64]) -> Vec<f64> {
        let mut g = incidence(mesh, Incidence::Grad).mul_vec(p);
        for (z, &c) in self.cochains.iter().zip(jumps) {
            crate::sparse::axpy(c, z, &mut g);
        }
        g
    }

    /// Operator (p, c) ↦ Gp + Zc as a sparse matrix.
    pub fn operator(&self, mesh: &Mesh) -> SparseMatrix {
        let g = incidence(mesh, Incidence::Grad);
        let nv = mesh.num_vertices();
        let trip = g
            .triplets()
            .collect::<Vec<_>>()
            .into_iter()
            .chain(self.cochains.iter().enumerate().flat_map(|(j, z)| z.iter().enumerate().filter(|(_, &v)| v != 0.0).map(move |(e, &v)| (e, nv + j, v))));
        SparseMatrix::from_triplets(mesh.num_edges(), self.dim(mesh), trip.collect::<Vec<_>>())
    }
}

/// Side label (+ = true) of each tet in the star of cut vertex `v`.
fn star_side(mesh: &Mesh, v: usize, star: &[usize], in_cut: &[bool], plus_tet: usize, id: usize) -> Result<Vec<bool>> {
    let pos = |t: usize| star.iter().position(|&s| s == t);
    let mut label = vec![NONE; star.len()];
    let mut ncomp = 0;
    for s in 0..star.len() {
        if label[s] != NONE {
            continue;
        }
        label[s] = ncomp;
        let mut stack = vec![s];
        while let Some(k) = stack.pop() {
            let t = star[k];
            let lv = mesh.tets()[t].iter().position(|&w| w == v).unwrap();
            for (lf, &f) in mesh.tet_faces(t).iter().enumerate() {
                if lf == lv || in_cut[f] {
                    continue;
                }
                let o = mesh.other_tet(f, t);
                if o == NONE {
                    continue;
                }
                if let Some(ko) = pos(o) {
                    if label[ko] == NONE {
                        label[ko] = ncomp;
                        stack.push(ko);
                    }
                }
            }
        }
        ncomp += 1;
    }
    if ncomp < 2 {
        return Err(Error::Topology(format!("cut sigma{id} does not separate the cells around vertex {v}")));
    }
    let plus = label[pos(plus_tet).unwrap()];
    Ok(label.iter().map(|&l| l == plus).collect())
}

/// Make an RT field with zero boundary fluxes exactly divergence-free by
/// subtracting the σ⁻¹-gradient correction of the mixed Neumann problem
/// [M, Dᵀ; D, 0](δ, μ) = (0, D t) over interior faces. Returns μ (P0).
pub(crate) fn remove_divergence(mesh: &Mesh, m_rt: &SparseMatrix, t: &mut [f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    let f0 = mesh.interior_faces();
    let all_t: Vec<usize> = (0..mesh.num_tets()).collect();
    let d = incidence(mesh, Incidence::Div);
    let b = d.mul_vec(t);
    let m00 = m_rt.submatrix(&f0, &f0);
    let d0 = d.submatrix(&all_t, &f0);
    let k = SparseMatrix::saddle(&m00, &d0, None);
    let pinv = saddle_preconditioner(&m00, &d0, cfg.preconditioner);
    let rhs: Vec<f64> = std::iter::repeat(0.0).take(f0.len()).chain(b).collect();
    let (sol, stats) = minres(&k, &rhs, &pinv, cfg).map_err(|e| e.at_stage("divergence correction"))?;
    for (i, &f) in f0.iter().enumerate() {
        t[f] -= sol[i];
    }
    Ok((sol[f0.len()..].to_vec(), stats))
}

/// Remove from an RT_0 field its M-orthogonal projection onto curls of NED
/// fields with zero tangential trace. Returns the potential (interior-edge values).
pub(crate) fn remove_curls(mesh: &Mesh, m_rt: &SparseMatrix, t: &mut [f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    let e0 = mesh.interior_edges();
    let all_f: Vec<usize> = (0..mesh.num_faces()).collect();
    let c0 = incidence(mesh, Incidence::Curl).submatrix(&all_f, &e0);
    let a = m_rt.congruence(&c0);
    let rhs = c0.tr_mul_vec(&m_rt.mul_vec(t));
    let (w, stats) = cg_solve(&a, &rhs, cfg, None).map_err(|e| e.at_stage("curl projection"))?;
    let cw = c0.mul_vec(&w);
    t.iter_mut().zip(&cw).for_each(|(t, c)| *t -= c);
    Ok((w, stats))
}

/// Basis of K_{T,σ}: RT fields with zero divergence and normal trace,
/// σ-orthogonal to curls of tangentially-zero NED fields, normalized to
/// unit flux through their own cut.
pub fn magnetic_basis(mesh: &Mesh, sigma: &CoefficientField, cfg: &SolverConfig) -> Result<HarmonicBasis> {
    let (_, n2) = betti_counts(mesh)?;
    let mut stats = SolveStats { converged: true, ..Default::default() };
    let mut basis = HarmonicBasis { kind: BasisKind::Magnetic, fields: vec![], gram: vec![], gamma0_flux: vec![], potentials: vec![], coefficient: sigma.name().into(), stats };
    if n2 == 0 {
        return Ok(basis);
    }
    let js = JumpSpace::new(mesh)?;
    let nv = mesh.num_vertices();
    let m_inv = mass_matrix(mesh, FormDegree::Ned, sigma, Weight::Inverse)?;
    let m_rt = mass_matrix(mesh, FormDegree::Rt, sigma, Weight::Direct)?;
    let op = js.operator(mesh);
    let a = m_inv.congruence(&op);
    let mut ns = vec![0.0; nv + n2];
    ns[..nv].iter_mut().for_each(|v| *v = 1.0 / (nv as f64).sqrt());
    let mut raw = Vec::with_capacity(n2);
    for j in 0..n2 {
        let mut rhs = vec![0.0; nv + n2];
        rhs[nv + j] = 1.0;
        let (q, st) = cg_solve(&a, &rhs, cfg, Some(std::slice::from_ref(&ns))).map_err(|e| e.at_stage("jump problem"))?;
        stats.merge(st);
        let g = op.mul_vec(&q);
        // σ⁻¹∇⁰q as fluxes; boundary fluxes vanish for members of K_{T,σ}
        let mut t = face_fluxes_from_cells(mesh, |tt, lam, x| {
            let p = mesh.tet_points(tt);
            let gr = barycentric_gradients(&p);
            let phi = local_ned(mesh, tt, &gr, lam);
            let v: crate::Vec3 = mesh.tet_edges(tt).iter().zip(&phi).map(|(&e, w)| w * g[e]).sum();
            if sigma.is_identity() {
                v
            } else {
                sigma.eval_weighted(mesh, tt, x, Weight::Inverse) * v
            }
        });
        mesh.boundary_faces().iter().for_each(|&f| t[f] = 0.0);
        stats.merge(remove_divergence(mesh, &m_rt, &mut t, cfg)?.1);
        stats.merge(remove_curls(mesh, &m_rt, &mut t, cfg)?.1);
        raw.push(DofVector::new(FormDegree::Rt, t));
    }
    let flux = DMatrix::from_fn(n2, n2, |k, j| cut_flux(mesh, &raw[j], k + 1).unwrap());
    let inv = flux.clone().try_inverse().ok_or_else(|| Error::Topology("cut fluxes of the harmonic candidates are degenerate".into()))?;
    for j in 0..n2 {
        let mut h = DofVector::zeros(FormDegree::Rt, mesh);
        for (i, r) in raw.iter().enumerate() {
            h.axpy(inv[(i, j)], r);
        }
        basis.fields.push(h);
    }
    basis.gram = (0..n2).map(|k| (0..n2).map(|j| cut_flux(mesh, &basis.fields[j], k + 1).unwrap()).collect()).collect();
    basis.stats = stats;
    Ok(basis)
}

/// P1 indicator of the vertices of Γ_k.
pub(crate) fn component_indicator(mesh: &Mesh, k: usize) -> Vec<f64> {
    (0..mesh.num_vertices()).map(|v| if mesh.vertex_component(v) == Some(k) { 1.0 } else { 0.0 }).collect()
}

/// Weak outward flux ⟨A h·n, 1⟩_{Γ_k} of a NED field, `m` the A-weighted NED mass.
pub fn weak_component_flux(mesh: &Mesh, m: &SparseMatrix, h: &[f64], k: usize) -> f64 {
    let g = incidence(mesh, Incidence::Grad);
    dot(&m.mul_vec(h), &g.mul_vec(&component_indicator(mesh, k)))
}

/// Prolongation from Θ⁰ (interior vertices, then one value per Γ_i, i ≥ 1) to P1.
pub(crate) fn theta0_prolongation(mesh: &Mesh) -> SparseMatrix {
    let interior = mesh.interior_vertices();
    let n_int = interior.len();
    let n1 = mesh.boundary_components().len() - 1;
    let mut trip: Vec<_> = interior.iter().enumerate().map(|(i, &v)| (v, i, 1.0)).collect();
    for v in 0..mesh.num_vertices() {
        if let Some(c) = mesh.vertex_component(v) {
            if c > 0 {
                trip.push((v, n_int + c - 1, 1.0));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_vertices(), n_int + n1, trip)
}

/// Basis of K_{N,ε}: gradients ∇q_i with q_i ∈ Θ⁰ solving
/// ∫ ε∇q_i·∇r = r|_{Γ_i}.
pub fn electric_basis(mesh: &Mesh, epsilon: &CoefficientField, cfg: &SolverConfig) -> Result<HarmonicBasis> {
    let (n1, _) = betti_counts(mesh)?;
    let mut stats = SolveStats { converged: true, ..Default::default() };
    let mut basis = HarmonicBasis { kind: BasisKind::Electric, fields: vec![], gram: vec![], gamma0_flux: vec![], potentials: vec![], coefficient: epsilon.name().into(), stats };
    if n1 == 0 {
        return Ok(basis);
    }
    let p = theta0_prolongation(mesh);
    let m = mass_matrix(mesh, FormDegree::Ned, epsilon, Weight::Direct)?;
    let k = stiffness(mesh, epsilon, Weight::Direct)?.congruence(&p);
    let g = incidence(mesh, Incidence::Grad);
    let n_int = p.cols() - n1;
    for i in 0..n1 {
        let mut rhs = vec![0.0; p.cols()];
        rhs[n_int + i] = 1.0;
        let (x, st) = cg_solve(&k, &rhs, cfg, None).map_err(|e| e.at_stage("boundary-component problem"))?;
        stats.merge(st);
        let q = p.mul_vec(&x);
        basis.fields.push(DofVector::new(FormDegree::Ned, g.mul_vec(&q)));
        basis.potentials.push(DofVector::new(FormDegree::P1, q));
    }
    basis.gram = (1..=n1).map(|c| basis.fields.iter().map(|h| weak_component_flux(mesh, &m, &h.values, c)).collect()).collect();
    basis.gamma0_flux = basis.fields.iter().map(|h| weak_component_flux(mesh, &m, &h.values, 0)).collect();
    basis.stats = stats;
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, Primitive};
    use crate::sparse::norm;

    fn torus() -> Mesh {
        generate_primitive(&Primitive::SolidTorus { major: 2.0, minor: 0.5, refinement: 1, with_cut: true }).unwrap()
    }

    #[test]
    fn jump_cochain_is_closed_but_not_exact() {
        let m = torus();
        let js = JumpSpace::new(&m).unwrap();
        let c = incidence(&m, Incidence::Curl);
        assert_eq!(norm(&c.mul_vec(&js.cochains[0])), 0.0);
        // circulation around the ring of edges at the torus centre line is ±1
        let cut = &m.cuts()[0];
        assert!(!cut.boundary_curve.is_empty());
        let total: f64 = js.cochains[0].iter().map(|v| v.abs()).sum();
        assert!(total > 0.0);
    }

    #[test]
    fn cube_has_empty_bases() {
        let m = generate_primitive(&Primitive::Cube { n: 2 }).unwrap();
        let id = CoefficientField::identity();
        assert_eq!(magnetic_basis(&m, &id, &SolverConfig::default()).unwrap().dim(), 0);
        assert_eq!(electric_basis(&m, &id, &SolverConfig::default()).unwrap().dim(), 0);
    }

    #[test]
    fn torus_magnetic_member() {
        let m = torus();
        let b = magnetic_basis(&m, &CoefficientField::identity(), &SolverConfig::default()).unwrap();
        assert_eq!(b.dim(), 1);
        assert!(b.gram_error() < 1e-8, "{:?}", b.gram);
        let h = &b.fields[0].values;
        let d = incidence(&m, Incidence::Div).mul_vec(h);
        assert!(norm(&d) < 1e-10 * norm(h));
        assert!(m.boundary_faces().iter().all(|&f| h[f] == 0.0));
    }

    #[test]
    fn shell_electric_member() {
        let m = generate_primitive(&Primitive::SphericalShell { r_in: 1.0, r_out: 2.0, refinement: 1 }).unwrap();
        let b = electric_basis(&m, &CoefficientField::identity(), &SolverConfig::default()).unwrap();
        assert_eq!(b.dim(), 1);
        assert!(b.gram_error() < 1e-8);
        assert!((b.gamma0_flux[0] + 1.0).abs() < 1e-8);
        let c = incidence(&m, Incidence::Curl);
        assert!(norm(&c.mul_vec(&b.fields[0].values)) < 1e-12);
    }
}
