//! Discrete Friedrichs-type constants on continuous vector P1 fields.
//!
//! L(v) = ‖v‖² + ‖∇v‖² and, for the normal kind,
//! R(v) = α‖v‖² + ‖curl(σv)‖² + ‖div v‖² + ‖v·n‖²_∂Ω; the tangential kind
//! uses ‖curl v‖² + ‖div(εv)‖² + ‖v×n‖²_∂Ω. σ and ε are frozen at cell
//! centroids and the curl and divergence are taken cellwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{barycentric_gradients, TET_DEG2};
use crate::linsolve::{cg_solve, SolverConfig};
use crate::sparse::{dot, norm, SparseMatrix};
use crate::whitney::CoefficientField;
use crate::{Error, Mat3, Mesh, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FriedrichsKind {
    Normal,
    Tangential,
}

/// Right-hand side variants: with the ‖v‖² term, without it, or with the
/// squared cut fluxes (normal kind) or Γ_i fluxes, i ≥ 1 (tangential kind)
/// in its place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RForm {
    WithL2,
    WithoutL2,
    CutFlux,
}

/// Norm of the boundary trace term: plain L², or the mesh-weighted
/// Σ_F h_F⁻¹‖·‖²_{L²(F)} standing in for the fractional trace norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceNorm {
    L2,
    MeshWeighted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsEstimate {
    pub kind: FriedrichsKind,
    pub form: RForm,
    pub trace: TraceNorm,
    pub coefficient: String,
    pub p: f64,
    pub constant: f64,
    /// True for the sampling route (p ≠ 2).
    pub lower_bound: bool,
    /// Maximizing field, nodal values.
    pub extremal: Vec<[f64; 3]>,
    pub iterations: usize,
    /// ‖Lx − C²Rx‖/‖Lx‖ of the returned field (eigen route).
    pub eigen_residual: f64,
    /// (cells, constant) for each mesh of a refinement study.
    pub history: Vec<(usize, f64)>,
}

pub const POWER_STEPS: usize = 100;
pub const SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsConfig {
    pub kind: FriedrichsKind,
    pub form: RForm,
    pub trace: TraceNorm,
    pub p: f64,
    pub seed: u64,
}

impl Default for FriedrichsConfig {
    fn default() -> Self {
        FriedrichsConfig { kind: FriedrichsKind::Normal, form: RForm::WithL2, trace: TraceNorm::MeshWeighted, p: 2.0, seed: DEFAULT_SEED }
    }
}

/// Per-cell linear maps from the 12 nodal values to the cellwise constants
/// curl (3 rows) and div (1 row).
struct CellOps {
    grads: [Vec3; 4],
    curl: [[f64; 12]; 3],
    div: [f64; 12],
}

fn cell_ops(mesh: &Mesh, t: usize, coeff: &CoefficientField, kind: FriedrichsKind) -> CellOps {
    let p = mesh.tet_points(t);
    let grads = barycentric_gradients(&p);
    let a: Mat3 = coeff.eval(mesh, t, &mesh.centroid(t));
    let (curl_w, div_w) = match kind {
        FriedrichsKind::Normal => (a, Mat3::identity()),
        FriedrichsKind::Tangential => (Mat3::identity(), a),
    };
    let mut curl = [[0.0; 12]; 3];
    let mut div = [0.0; 12];
    for (i, g) in grads.iter().enumerate() {
        let dg = div_w.transpose() * g;
        for c in 0..3 {
            let col = g.cross(&curl_w.column(c).into_owned());
            for r in 0..3 {
                curl[r][3 * i + c] = col[r];
            }
            div[3 * i + c] = dg[c];
        }
    }
    CellOps { grads, curl, div }
}

fn dofs(tet: &[usize; 4]) -> [usize; 12] {
    std::array::from_fn(|k| 3 * tet[k / 3] + k % 3)
}

/// Assembled L and R.
fn face_diameter(mesh: &Mesh, f: usize) -> f64 {
    mesh.face_edges(f).iter().map(|&e| mesh.edge_vector(e).norm()).fold(0.0, f64::max)
}

fn trace_weight(mesh: &Mesh, f: usize, trace: TraceNorm) -> f64 {
    match trace {
        TraceNorm::L2 => 1.0,
        TraceNorm::MeshWeighted => 1.0 / face_diameter(mesh, f),
    }
}

fn forms(mesh: &Mesh, coeff: &CoefficientField, kind: FriedrichsKind, form: RForm, trace: TraceNorm) -> Result<(SparseMatrix, SparseMatrix)> {
    let n = 3 * mesh.num_vertices();
    let mut lt = Vec::new();
    let mut rt = Vec::new();
    let alpha = if form == RForm::WithL2 { 1.0 } else { 0.0 };
    for (t, tet) in mesh.tets().iter().enumerate() {
        let vol = mesh.volume(t);
        let ops = cell_ops(mesh, t, coeff, kind);
        let d = dofs(tet);
        for i in 0..4 {
            for j in 0..4 {
                let mass = vol * if i == j { 0.1 } else { 0.05 };
                let stiff = vol * ops.grads[i].dot(&ops.grads[j]);
                for c in 0..3 {
                    lt.push((d[3 * i + c], d[3 * j + c], mass + stiff));
                    if alpha > 0.0 {
                        rt.push((d[3 * i + c], d[3 * j + c], alpha * mass));
                    }
                }
            }
        }
        for a in 0..12 {
            for b in 0..12 {
                let cc: f64 = (0..3).map(|r| ops.curl[r][a] * ops.curl[r][b]).sum();
                rt.push((d[a], d[b], vol * (cc + ops.div[a] * ops.div[b])));
            }
        }
    }
    for &f in mesh.boundary_faces() {
        let area = mesh.face_area(f) * trace_weight(mesh, f, trace);
        let nrm = mesh.outward_normal(f);
        let proj = match kind {
            FriedrichsKind::Normal => nrm * nrm.transpose(),
            FriedrichsKind::Tangential => Mat3::identity() - nrm * nrm.transpose(),
        };
        let vs = mesh.faces()[f];
        for (i, &a) in vs.iter().enumerate() {
            for (j, &b) in vs.iter().enumerate() {
                let m = area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                for r in 0..3 {
                    for c in 0..3 {
                        rt.push((3 * a + r, 3 * b + c, m * proj[(r, c)]));
                    }
                }
            }
        }
    }
    let mut r = SparseMatrix::from_triplets(n, n, rt);
    if form == RForm::CutFlux {
        for l in flux_functionals(mesh, kind)? {
            let nz: Vec<(usize, f64)> = l.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
            let outer = nz.iter().flat_map(|&(i, a)| nz.iter().map(move |&(j, b)| (i, j, a * b)));
            r = r.add(&SparseMatrix::from_triplets(n, n, outer), 1.0);
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, lt), r))
}

/// ∫ v·n over each cut Σ_j (normal kind) or each Γ_i, i ≥ 1 (tangential kind).
fn flux_functionals(mesh: &Mesh, kind: FriedrichsKind) -> Result<Vec<Vec<f64>>> {
    let n = 3 * mesh.num_vertices();
    let surfaces: Vec<Vec<(usize, f64)>> = match kind {
        FriedrichsKind::Normal => mesh.cuts().iter().map(|c| c.faces.iter().copied().zip(c.signs.iter().copied()).collect()).collect(),
        FriedrichsKind::Tangential => mesh.boundary_components().iter().skip(1).map(|comp| comp.iter().map(|&f| (f, mesh.outward_sign(f))).collect()).collect(),
    };
    if surfaces.is_empty() {
        return Err(Error::Topology("the flux form needs at least one cut or inner boundary component".into()));
    }
    Ok(surfaces
        .iter()
        .map(|faces| {
            let mut l = vec![0.0; n];
            for &(f, s) in faces {
                let av = mesh.face_area_vector(f) * s;
                for &v in &mesh.faces()[f] {
                    for c in 0..3 {
                        l[3 * v + c] += av[c] / 3.0;
                    }
                }
            }
            l
        })
        .collect())
}

fn nodal(x: &[f64]) -> Vec<[f64; 3]> {
    x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// C_h for one mesh. p = 2: C_h² is the largest eigenvalue of the pencil
/// (L, R), approximated by power iteration on R⁻¹L; the reported value is the
/// Rayleigh quotient of the returned field. p ≠ 2: maximum of the norm ratio
/// over random fields, a lower bound.
pub fn friedrichs_constant(mesh: &Mesh, coeff: &CoefficientField, fc: &FriedrichsConfig, cfg: &SolverConfig) -> Result<FriedrichsEstimate> {
    if !(fc.p >= 1.0 && fc.p.is_finite()) {
        return Err(Error::Degenerate(format!("exponent p = {} must be finite and at least 1", fc.p)));
    }
    let mut est = FriedrichsEstimate {
        kind: fc.kind,
        form: fc.form,
        trace: fc.trace,
        coefficient: coeff.name().into(),
        p: fc.p,
        constant: 0.0,
        lower_bound: fc.p != 2.0,
        extremal: vec![],
        iterations: 0,
        eigen_residual: 0.0,
        history: vec![],
    };
    if fc.p != 2.0 {
        let (c, v) = sample_ratio(mesh, coeff, fc)?;
        est.constant = c;
        est.extremal = nodal(&v);
        est.iterations = SAMPLES;
        est.history.push((mesh.num_tets(), c));
        return Ok(est);
    }
    let (l, r) = forms(mesh, coeff, fc.kind, fc.form, fc.trace)?;
    // Krylov space of R⁻¹L built with R-orthonormal vectors; the Ritz pair
    // of the projected pencil is the estimate
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(POWER_STEPS);
    let mut rbasis: Vec<Vec<f64>> = Vec::with_capacity(POWER_STEPS);
    let mut w = start_vector(l.rows(), fc.seed);
    for k in 0..POWER_STEPS {
        let before = r.quad_form(&w).max(0.0).sqrt();
        for _ in 0..2 {
            for (q, rq) in basis.iter().zip(&rbasis) {
                let c = dot(rq, &w);
                crate::sparse::axpy(-c, q, &mut w);
            }
        }
        let rw = r.mul_vec(&w);
        let nrm = dot(&rw, &w).max(0.0).sqrt();
        if nrm <= 1e-10 * before || !nrm.is_finite() {
            break;
        }
        let q: Vec<f64> = w.iter().map(|v| v / nrm).collect();
        let (y, _) = cg_solve(&r, &l.mul_vec(&q), cfg, None).map_err(|e| e.at_stage(&format!("power step {k}")))?;
        rbasis.push(rw.iter().map(|v| v / nrm).collect());
        basis.push(q);
        est.iterations = k + 1;
        w = y;
    }
    let n = basis.len();
    let lq: Vec<Vec<f64>> = basis.iter().map(|q| l.mul_vec(q)).collect();
    let t = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (dot(&basis[i], &lq[j]) + dot(&basis[j], &lq[i])));
    let eig = t.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let mut x = vec![0.0; l.rows()];
    for (i, q) in basis.iter().enumerate() {
        crate::sparse::axpy(eig.eigenvectors[(i, top)], q, &mut x);
    }
    let rq = l.quad_form(&x) / r.quad_form(&x);
    let lx = l.mul_vec(&x);
    let rx = r.mul_vec(&x);
    let res: Vec<f64> = lx.iter().zip(&rx).map(|(a, b)| a - rq * b).collect();
    est.eigen_residual = norm(&res) / norm(&lx);
    est.constant = rq.sqrt();
    est.extremal = nodal(&x);
    est.history.push((mesh.num_tets(), est.constant));
    Ok(est)
}

/// Constants over a sequence of meshes, history filled in order.
pub fn friedrichs_study(meshes: &[Mesh], coeff: impl Fn(&Mesh) -> CoefficientField, fc: &FriedrichsConfig, cfg: &SolverConfig) -> Result<FriedrichsEstimate> {
    let mut last: Option<FriedrichsEstimate> = None;
    let mut history = Vec::new();
    for m in meshes {
        let e = friedrichs_constant(m, &coeff(m), fc, cfg)?;
        history.extend(e.history.iter().copied());
        last = Some(e);
    }
    let mut e = last.ok_or_else(|| Error::Degenerate("empty refinement study".into()))?;
    e.history = history;
    Ok(e)
}

/// Discrete L^p quantities of a vector P1 field: (‖v‖_p^p, ‖∇v‖_p^p, ‖curl‖_p^p, ‖div‖_p^p, ‖trace‖_p^p).
fn p_norms(mesh: &Mesh, coeff: &CoefficientField, fc: &FriedrichsConfig, x: &[f64]) -> [f64; 5] {
    let (kind, p) = (fc.kind, fc.p);
    let mut out = [0.0; 5];
    for (t, tet) in mesh.tets().iter().enumerate() {
        let vol = mesh.volume(t);
        let ops = cell_ops(mesh, t, coeff, kind);
        let d = dofs(tet);
        let xs: Vec<f64> = d.iter().map(|&k| x[k]).collect();
        for (b, w) in TET_DEG2.points.iter().zip(TET_DEG2.weights) {
            let v: Vec3 = (0..4).map(|i| Vec3::new(xs[3 * i], xs[3 * i + 1], xs[3 * i + 2]) * b[i]).sum();
            out[0] += w * vol * v.norm().powf(p);
        }
        let mut grad = Mat3::zeros();
        for i in 0..4 {
            grad += Vec3::new(xs[3 * i], xs[3 * i + 1], xs[3 * i + 2]) * ops.grads[i].transpose();
        }
        out[1] += vol * grad.norm().powf(p);
        let curl = Vec3::from_fn(|r, _| dot(&ops.curl[r], &xs));
        out[2] += vol * curl.norm().powf(p);
        out[3] += vol * dot(&ops.div, &xs).abs().powf(p);
    }
    for &f in mesh.boundary_faces() {
        let nrm = mesh.outward_normal(f);
        // h_F^{-1} for p = 2 becomes h_F^{1-p}
        let area = mesh.face_area(f) * trace_weight(mesh, f, fc.trace).powf(p - 1.0);
        let vals: Vec<Vec3> = mesh.faces()[f].iter().map(|&v| Vec3::new(x[3 * v], x[3 * v + 1], x[3 * v + 2])).collect();
        // vertex rule on the face
        for v in vals {
            let tr = match kind {
                FriedrichsKind::Normal => v.dot(&nrm).abs(),
                FriedrichsKind::Tangential => v.cross(&nrm).norm(),
            };
            out[4] += area / 3.0 * tr.powf(p);
        }
    }
    out
}

fn sample_ratio(mesh: &Mesh, coeff: &CoefficientField, fc: &FriedrichsConfig) -> Result<(f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(fc.seed);
    let n = 3 * mesh.num_vertices();
    let flux = match fc.form {
        RForm::CutFlux => flux_functionals(mesh, fc.kind)?,
        _ => vec![],
    };
    let p = fc.p;
    let mut best = (0.0, vec![0.0; n]);
    for _ in 0..SAMPLES {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = p_norms(mesh, coeff, fc, &x);
        let lhs = (q[0] + q[1]).powf(1.0 / p);
        let mut rhs = q[2].powf(1.0 / p) + q[3].powf(1.0 / p) + q[4].powf(1.0 / p);
        match fc.form {
            RForm::WithL2 => rhs += q[0].powf(1.0 / p),
            RForm::WithoutL2 => {}
            RForm::CutFlux => rhs += flux.iter().map(|l| dot(l, &x).abs()).sum::<f64>(),
        }
        let ratio = lhs / rhs;
        if ratio > best.0 {
            best = (ratio, x);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, Primitive};

    fn cube(n: usize) -> Mesh {
        generate_primitive(&Primitive::Cube { n }).unwrap()
    }

    #[test]
    fn random_fields_obey_the_eigen_constant() {
        let m = cube(2);
        let id = CoefficientField::identity();
        let fc = FriedrichsConfig::default();
        let e = friedrichs_constant(&m, &id, &fc, &SolverConfig::default()).unwrap();
        assert!(e.constant.is_finite() && e.constant > 0.0 && !e.lower_bound);
        let (l, r) = forms(&m, &id, fc.kind, fc.form, fc.trace).unwrap();
        let x: Vec<f64> = e.extremal.iter().flatten().copied().collect();
        let attained = (l.quad_form(&x) / r.quad_form(&x)).sqrt();
        assert!((attained - e.constant).abs() <= 1e-6 * e.constant);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v: Vec<f64> = (0..l.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(l.quad_form(&v) <= e.constant.powi(2) * r.quad_form(&v) * (1.0 + 1e-6));
        }
    }

    #[test]
    fn dense_oracle_matches_power_iteration() {
        let m = cube(1);
        let id = CoefficientField::identity();
        let fc = FriedrichsConfig::default();
        let (l, r) = forms(&m, &id, fc.kind, fc.form, fc.trace).unwrap();
        // largest eigenvalue of R^{-1/2} L R^{-1/2} via a symmetric dense solve
        let rc = r.to_dense().cholesky().unwrap();
        let linv = rc.l().try_inverse().unwrap();
        let s = &linv * l.to_dense() * linv.transpose();
        let top = s.symmetric_eigenvalues().max();
        let e = friedrichs_constant(&m, &id, &fc, &SolverConfig::default()).unwrap();
        assert!((e.constant - top.sqrt()).abs() < 1e-4 * top.sqrt(), "{} vs {}", e.constant, top.sqrt());
    }

    #[test]
    fn sampling_is_a_seeded_lower_bound() {
        let m = cube(2);
        let id = CoefficientField::identity();
        let fc = FriedrichsConfig { p: 3.0, ..Default::default() };
        let a = friedrichs_constant(&m, &id, &fc, &SolverConfig::default()).unwrap();
        let b = friedrichs_constant(&m, &id, &fc, &SolverConfig::default()).unwrap();
        assert!(a.lower_bound && a.constant > 0.0);
        assert_eq!(a, b);
        assert!(friedrichs_constant(&m, &id, &FriedrichsConfig { p: 0.5, ..Default::default() }, &SolverConfig::default()).is_err());
    }

    #[test]
    fn flux_form_needs_a_cut() {
        let m = cube(1);
        let fc = FriedrichsConfig { form: RForm::CutFlux, ..Default::default() };
        assert!(matches!(friedrichs_constant(&m, &CoefficientField::identity(), &fc, &SolverConfig::default()), Err(Error::Topology(_))));
    }
}
