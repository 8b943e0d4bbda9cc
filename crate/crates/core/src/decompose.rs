//! Weighted Helmholtz-Weyl splittings of RT and NED fields.

use serde::{Deserialize, Serialize};

use crate::harmonic::{electric_basis, magnetic_basis, weak_component_flux, BasisKind};
use crate::linsolve::{cg_solve, minres_saddle, SolveStats, SolverConfig};
use crate::solve::{gauged_curl_solve, theta0_gauge, StageStats};
use crate::sparse::{norm, sub, SparseMatrix};
use crate::whitney::{cut_flux, incidence, mass_matrix, CoefficientField, DofVector, FormDegree, Incidence, Weight};
use crate::{Mesh, Result};

const EPS0: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub name: String,
    /// |⟨a, b⟩| / (‖a‖ ‖b‖) in the weighted L² inner product.
    pub residual: f64,
}

/// Components of u = h + (gradient part) + (curl part).
///
/// magnetic (u ∈ RT): gradient part σ⁻¹∇χ ∈ RT with χ ∈ P0, curl part curl w
/// with w ∈ NED_0. electric (u ∈ NED): gradient part ∇χ with χ ∈ P1_0, curl
/// part y ∈ NED with εy = curl w weakly against NED_0, w ∈ RT_0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub kind: BasisKind,
    pub h: DofVector,
    /// Coefficients of h in the harmonic basis.
    pub coefficients: Vec<f64>,
    pub chi: DofVector,
    pub w: DofVector,
    pub gradient_part: DofVector,
    pub curl_part: DofVector,
    /// ‖u − h − gradient − curl‖ / ‖u‖ in the weighted norm.
    pub reconstruction: f64,
    /// Residual of the relation between the curl part and w.
    pub potential_residual: f64,
    pub pairings: Vec<Pairing>,
    /// Weighted L² norms of u, h, gradient part and curl part.
    pub norms: Vec<(String, f64)>,
    pub stats: Vec<StageStats>,
}

impl DecompositionResult {
    pub fn max_pairing(&self) -> f64 {
        self.pairings.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn pairing(name: &str, m: &SparseMatrix, a: &[f64], b: &[f64]) -> Pairing {
    let residual = m.bilinear(a, b).abs() / ((m.quad_form(a) * m.quad_form(b)).sqrt() + EPS0);
    Pairing { name: name.into(), residual }
}

fn wnorm(m: &SparseMatrix, a: &[f64]) -> f64 {
    m.quad_form(a).max(0.0).sqrt()
}

fn record(stats: &mut Vec<StageStats>, stage: &str, s: SolveStats) {
    stats.push(StageStats { stage: stage.into(), stats: s });
}

fn all_ids(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// u = h + σ⁻¹∇χ + curl w for u ∈ RT.
pub fn hw_magnetic(mesh: &Mesh, u: &DofVector, sigma: &CoefficientField, cfg: &SolverConfig) -> Result<DecompositionResult> {
    u.check(mesh, FormDegree::Rt)?;
    let mut stats = Vec::new();
    let ms = mass_matrix(mesh, FormDegree::Rt, sigma, Weight::Direct)?;
    let d = incidence(mesh, Incidence::Div);
    let f0 = mesh.interior_faces();
    // σg = ∇χ weakly, g·n = u·n, div g = div u
    let mut ub = vec![0.0; mesh.num_faces()];
    mesh.boundary_faces().iter().for_each(|&f| ub[f] = u.values[f]);
    let mub = ms.mul_vec(&ub);
    let rhs_f: Vec<f64> = f0.iter().map(|&f| -mub[f]).collect();
    let rhs_g = sub(&d.mul_vec(&u.values), &d.mul_vec(&ub));
    let (g0, chi, st) = minres_saddle(&ms.submatrix(&f0, &f0), &d.submatrix(&all_ids(mesh.num_tets()), &f0), &rhs_f, &rhs_g, cfg).map_err(|e| e.at_stage("gradient part"))?;
    record(&mut stats, "gradient part", st);
    let mut g = ub;
    f0.iter().zip(&g0).for_each(|(&f, &v)| g[f] = v);
    let z = sub(&u.values, &g);
    let basis = magnetic_basis(mesh, sigma, cfg)?;
    record(&mut stats, "harmonic basis", basis.stats);
    let zv = DofVector::new(FormDegree::Rt, z.clone());
    let coefficients = (1..=basis.dim()).map(|j| cut_flux(mesh, &zv, j)).collect::<Result<Vec<_>>>()?;
    let mut h = vec![0.0; mesh.num_faces()];
    for (b, &c) in basis.fields.iter().zip(&coefficients) {
        crate::sparse::axpy(c, &b.values, &mut h);
    }
    let y = sub(&z, &h);
    // curl w = y with w ∈ NED_0 orthogonal to ∇Θ⁰
    let c = incidence(mesh, Incidence::Curl);
    let mf = mass_matrix(mesh, FormDegree::Rt, &CoefficientField::identity(), Weight::Identity)?;
    let e0 = mesh.interior_edges();
    let r = c.tr_mul_vec(&mf.mul_vec(&y));
    let f: Vec<f64> = e0.iter().map(|&e| r[e]).collect();
    let bt = theta0_gauge(mesh)?;
    let (w0, st) = gauged_curl_solve(mesh, &bt, &f, &vec![0.0; bt.rows()], cfg).map_err(|e| e.at_stage("curl potential"))?;
    record(&mut stats, "curl potential", st);
    let mut w = vec![0.0; mesh.num_edges()];
    e0.iter().zip(&w0).for_each(|(&e, &v)| w[e] = v);
    let cw = c.mul_vec(&w);
    let rec = sub(&sub(&sub(&u.values, &h), &g), &cw);
    let un = wnorm(&ms, &u.values);
    let pairings = vec![pairing("h.gradChi", &ms, &h, &g), pairing("curlW.sigmaH", &ms, &cw, &h), pairing("gradChi.curlW", &ms, &g, &cw)];
    let norms = vec![("u".into(), un), ("h".into(), wnorm(&ms, &h)), ("gradient".into(), wnorm(&ms, &g)), ("curl".into(), wnorm(&ms, &cw))];
    Ok(DecompositionResult {
        kind: BasisKind::Magnetic,
        h: DofVector::new(FormDegree::Rt, h),
        coefficients,
        chi: DofVector::new(FormDegree::P0, chi),
        w: DofVector::new(FormDegree::Ned, w),
        gradient_part: DofVector::new(FormDegree::Rt, g),
        curl_part: DofVector::new(FormDegree::Rt, cw.clone()),
        reconstruction: wnorm(&ms, &rec) / (un + EPS0),
        potential_residual: wnorm(&ms, &sub(&cw, &y)) / (wnorm(&ms, &y) + wnorm(&ms, &cw) + EPS0),
        pairings,
        norms,
        stats,
    })
}

/// u = h + ∇χ + ε⁻¹curl w for u ∈ NED.
pub fn hw_electric(mesh: &Mesh, u: &DofVector, eps: &CoefficientField, cfg: &SolverConfig) -> Result<DecompositionResult> {
    u.check(mesh, FormDegree::Ned)?;
    let mut stats = Vec::new();
    let me = mass_matrix(mesh, FormDegree::Ned, eps, Weight::Direct)?;
    let v0 = mesh.interior_vertices();
    let gfull = incidence(mesh, Incidence::Grad);
    let g0 = gfull.submatrix(&all_ids(mesh.num_edges()), &v0);
    let (chi0, st) = cg_solve(&me.congruence(&g0), &g0.tr_mul_vec(&me.mul_vec(&u.values)), cfg, None).map_err(|e| e.at_stage("gradient part"))?;
    record(&mut stats, "gradient part", st);
    let grad = g0.mul_vec(&chi0);
    let z = sub(&u.values, &grad);
    let basis = electric_basis(mesh, eps, cfg)?;
    record(&mut stats, "harmonic basis", basis.stats);
    let coefficients: Vec<f64> = (1..=basis.dim()).map(|i| weak_component_flux(mesh, &me, &z, i)).collect();
    let mut h = vec![0.0; mesh.num_edges()];
    for (b, &c) in basis.fields.iter().zip(&coefficients) {
        crate::sparse::axpy(c, &b.values, &mut h);
    }
    let y = sub(&z, &h);
    // w = C_0 b ∈ RT_0 with (w, curl v) = (εy, v) for v ∈ NED_0
    let e0 = mesh.interior_edges();
    let my = me.mul_vec(&y);
    let f: Vec<f64> = e0.iter().map(|&e| my[e]).collect();
    let bt = theta0_gauge(mesh)?;
    let (b0, st) = gauged_curl_solve(mesh, &bt, &f, &vec![0.0; bt.rows()], cfg).map_err(|e| e.at_stage("curl potential"))?;
    record(&mut stats, "curl potential", st);
    let c0 = incidence(mesh, Incidence::Curl).submatrix(&all_ids(mesh.num_faces()), &e0);
    let w = c0.mul_vec(&b0);
    let mf = mass_matrix(mesh, FormDegree::Rt, &CoefficientField::identity(), Weight::Identity)?;
    let weak = c0.tr_mul_vec(&mf.mul_vec(&w));
    let pres = norm(&sub(&weak, &f)) / (norm(&f) + norm(&weak) + EPS0);
    let mut chi = vec![0.0; mesh.num_vertices()];
    v0.iter().zip(&chi0).for_each(|(&v, &c)| chi[v] = c);
    let rec = sub(&sub(&sub(&u.values, &h), &grad), &y);
    let un = wnorm(&me, &u.values);
    let pairings = vec![pairing("epsH.gradChi", &me, &h, &grad), pairing("curlW.h", &me, &y, &h), pairing("gradChi.curlW", &me, &grad, &y)];
    let norms = vec![("u".into(), un), ("h".into(), wnorm(&me, &h)), ("gradient".into(), wnorm(&me, &grad)), ("curl".into(), wnorm(&me, &y))];
    Ok(DecompositionResult {
        kind: BasisKind::Electric,
        h: DofVector::new(FormDegree::Ned, h),
        coefficients,
        chi: DofVector::new(FormDegree::P1, chi),
        w: DofVector::new(FormDegree::Rt, w),
        gradient_part: DofVector::new(FormDegree::Ned, grad),
        curl_part: DofVector::new(FormDegree::Ned, y),
        reconstruction: wnorm(&me, &rec) / (un + EPS0),
        potential_residual: pres,
        pairings,
        norms,
        stats,
    })
}
