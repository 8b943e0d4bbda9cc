//! The magnetostatic and electric solver pipelines.

use serde::{Deserialize, Serialize};

use crate::compat::{check_electric, check_magnetostatic, DataClass};
use crate::harmonic::{electric_basis, magnetic_basis, theta0_prolongation, HarmonicBasis, JumpSpace};
use crate::linsolve::{cg_solve, minres_saddle, SolveStats, SolverConfig};
use crate::sparse::{add, norm, sub, SparseMatrix};
use crate::whitney::{incidence, mass_matrix, mixed_mass, CoefficientField, DofVector, FormDegree, Incidence, Weight};
use crate::{Error, Mesh, Result};

const EPS0: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Diagnostic {
    pub fn ok(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub stats: SolveStats,
}

/// Result of a vector-potential or standard div-curl solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialResult {
    pub field: DofVector,
    pub certificates: Vec<Diagnostic>,
    pub stats: Vec<StageStats>,
}

/// Particular solution plus the harmonic family u₀ + span(basis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub u0: DofVector,
    pub basis: HarmonicBasis,
    pub diagnostics: Vec<Diagnostic>,
    pub stats: Vec<StageStats>,
    pub converged: bool,
}

fn rel(num: f64, den: f64) -> f64 {
    num / (den + EPS0)
}

fn stage(stats: &mut Vec<StageStats>, name: &str, s: SolveStats) {
    stats.push(StageStats { stage: name.into(), stats: s });
}

fn all_ids(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// RT coefficients of the boundary normal data λ (u·n per boundary face).
pub fn boundary_fluxes(mesh: &Mesh, lam: &[f64]) -> Result<Vec<f64>> {
    if lam.len() != mesh.boundary_faces().len() {
        return Err(Error::Dimension { expected: mesh.boundary_faces().len(), got: lam.len() });
    }
    let mut u = vec![0.0; mesh.num_faces()];
    for (&f, &l) in mesh.boundary_faces().iter().zip(lam) {
        u[f] = l * mesh.face_area(f) * mesh.outward_sign(f);
    }
    Ok(u)
}

/// NED coefficients carrying the boundary tangential data (circulations of n×Λ).
pub fn boundary_circulations(mesh: &Mesh, lam: &[f64]) -> Result<Vec<f64>> {
    if lam.len() != mesh.boundary_edges().len() {
        return Err(Error::Dimension { expected: mesh.boundary_edges().len(), got: lam.len() });
    }
    let mut v = vec![0.0; mesh.num_edges()];
    for (&e, &l) in mesh.boundary_edges().iter().zip(lam) {
        v[e] = l;
    }
    Ok(v)
}

/// ψ ∈ NED with curl ψ = J, orthogonal to all discrete gradients (weak
/// div ψ = 0 with natural ψ·n = 0) and to the cut cochains (zero cut fluxes).
pub fn vector_potential_normal(mesh: &Mesh, j: &DofVector, cfg: &SolverConfig) -> Result<PotentialResult> {
    j.check(mesh, FormDegree::Rt)?;
    let id = CoefficientField::identity();
    let c = incidence(mesh, Incidence::Curl);
    let mf = mass_matrix(mesh, FormDegree::Rt, &id, Weight::Identity)?;
    let me = mass_matrix(mesh, FormDegree::Ned, &id, Weight::Identity)?;
    let a = mf.congruence(&c);
    let f = c.tr_mul_vec(&mf.mul_vec(&j.values));
    // gauge rows: Gᵀ M (one vertex dropped, constants are in the kernel of G) and Zᵀ M
    let op = JumpSpace::new(mesh)?.operator(mesh);
    let keep: Vec<usize> = (1..op.cols()).collect();
    let b = op.transpose().matmul(&me).submatrix(&keep, &all_ids(mesh.num_edges()));
    let mut stats = Vec::new();
    let (psi, _, st) = minres_saddle(&a, &b, &f, &vec![0.0; b.rows()], cfg).map_err(|e| e.at_stage("vector potential (normal gauge)"))?;
    stage(&mut stats, "vector potential", st);
    let cpsi = c.mul_vec(&psi);
    let gauge = b.mul_vec(&psi);
    let certificates = vec![
        Diagnostic { name: "curl".into(), value: rel(norm(&sub(&cpsi, &j.values)), norm(&c.abs_mul_vec(&psi)) + norm(&j.values)), tolerance: 1e-8 },
        Diagnostic { name: "gauge".into(), value: rel(norm(&gauge), norm(&b.abs_mul_vec(&psi))), tolerance: 1e-8 },
    ];
    Ok(PotentialResult { field: DofVector::new(FormDegree::Ned, psi), certificates, stats })
}

/// Diagnostics of a magnetostatic solution u ∈ RT: weak curl(σu) − J against
/// tangentially-zero NED fields, div u − ρ per cell, and u·n − λ.
pub fn magnetostatic_diagnostics(mesh: &Mesh, sigma: &CoefficientField, u: &DofVector, j: &DofVector, rho: &DofVector, lam: &[f64]) -> Result<Vec<Diagnostic>> {
    let e0 = mesh.interior_edges();
    let ms = mass_matrix(mesh, FormDegree::Rt, sigma, Weight::Direct)?;
    let k = mixed_mass(mesh, &CoefficientField::identity(), Weight::Identity)?;
    let c0 = incidence(mesh, Incidence::Curl).submatrix(&all_ids(mesh.num_faces()), &e0);
    let k0 = k.submatrix(&e0, &all_ids(mesh.num_faces()));
    let lhs = c0.tr_mul_vec(&ms.mul_vec(&u.values));
    let rhs = k0.mul_vec(&j.values);
    let cscale = add(&c0.abs_tr_mul_vec(&ms.abs_mul_vec(&u.values)), &k0.abs_mul_vec(&j.values));
    let d = incidence(mesh, Incidence::Div);
    let du = d.mul_vec(&u.values);
    let rho_int: Vec<f64> = rho.values.iter().zip(mesh.volumes()).map(|(r, v)| r * v).collect();
    let ub = boundary_fluxes(mesh, lam)?;
    let bdiff: Vec<f64> = mesh.boundary_faces().iter().map(|&f| u.values[f] - ub[f]).collect();
    let bscale: Vec<f64> = mesh.boundary_faces().iter().map(|&f| ub[f]).collect();
    Ok(vec![
        Diagnostic { name: "curl".into(), value: rel(norm(&sub(&lhs, &rhs)), norm(&cscale)), tolerance: 1e-8 },
        Diagnostic { name: "div".into(), value: rel(norm(&sub(&du, &rho_int)), norm(&d.abs_mul_vec(&u.values)) + norm(&rho_int)), tolerance: 1e-8 },
        Diagnostic { name: "trace".into(), value: rel(norm(&bdiff), norm(&bscale) + norm(&u.values)), tolerance: 1e-8 },
    ])
}

/// Particular solution of curl(σu) = J, div u = ρ, u·n = λ in RT plus the
/// σ-harmonic family. u₀ solves the mixed problem
/// (σu₀, v) + (q, div v) = (ψ, v) ∀ v ∈ RT_0, div u₀ = ρ, u₀·n = λ,
/// i.e. σu₀ = ψ + ∇q with ψ the normal-gauge vector potential of J.
pub fn solve_magnetostatic(mesh: &Mesh, j: &DofVector, rho: &DofVector, lam: &[f64], sigma: &CoefficientField, cfg: &SolverConfig) -> Result<SolutionBundle> {
    check_magnetostatic(mesh, j, rho, lam, 1e-8, DataClass::Discrete)?.into_result()?;
    let pot = vector_potential_normal(mesh, j, cfg)?;
    let mut stats = pot.stats.clone();
    let f0 = mesh.interior_faces();
    let nf = mesh.num_faces();
    let ms = mass_matrix(mesh, FormDegree::Rt, sigma, Weight::Direct)?;
    let k = mixed_mass(mesh, &CoefficientField::identity(), Weight::Identity)?;
    let d = incidence(mesh, Incidence::Div);
    let ub = boundary_fluxes(mesh, lam)?;
    let m00 = ms.submatrix(&f0, &f0);
    let d0 = d.submatrix(&all_ids(mesh.num_tets()), &f0);
    let load = k.tr_mul_vec(&pot.field.values);
    let mub = ms.mul_vec(&ub);
    let f: Vec<f64> = f0.iter().map(|&i| load[i] - mub[i]).collect();
    let dub = d.mul_vec(&ub);
    let g: Vec<f64> = rho.values.iter().zip(mesh.volumes()).zip(&dub).map(|((r, v), b)| r * v - b).collect();
    let (ui, _, st) = minres_saddle(&m00, &d0, &f, &g, cfg).map_err(|e| e.at_stage("mixed conormal problem"))?;
    stage(&mut stats, "mixed conormal problem", st);
    let mut u = ub;
    for (k, &fi) in f0.iter().enumerate() {
        u[fi] = ui[k];
    }
    debug_assert_eq!(u.len(), nf);
    let u0 = DofVector::new(FormDegree::Rt, u);
    let basis = magnetic_basis(mesh, sigma, cfg)?;
    stage(&mut stats, "harmonic basis", basis.stats);
    let diagnostics = magnetostatic_diagnostics(mesh, sigma, &u0, j, rho, lam)?;
    let converged = diagnostics.iter().all(Diagnostic::ok) && pot.certificates.iter().all(Diagnostic::ok) && stats.iter().all(|s| s.stats.converged);
    Ok(SolutionBundle { u0, basis, diagnostics, stats, converged })
}

/// Weak load (ρ, φ_v) of a P0 density against the P1 hats.
pub fn p0_load(mesh: &Mesh, rho: &DofVector) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_vertices()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        for &v in tet {
            b[v] += rho.values[t] * mesh.volume(t) / 4.0;
        }
    }
    b
}

/// Gauge rows (∇r, ·) for r ∈ Θ⁰ over all edges: weak divergence against
/// interior hats and flux through each Γ_i, i ≥ 1.
pub(crate) fn theta0_gauge(mesh: &Mesh) -> Result<SparseMatrix> {
    let me = mass_matrix(mesh, FormDegree::Ned, &CoefficientField::identity(), Weight::Identity)?;
    let p = theta0_prolongation(mesh);
    Ok(p.transpose().matmul(&incidence(mesh, Incidence::Grad).transpose()).matmul(&me))
}

/// b ∈ NED_0 solving C_0ᵀ M C_0 b = f on interior edges with gauge B b = g,
/// B the Θ⁰ rows restricted to interior edges. `f` must annihilate ∇Θ⁰.
pub(crate) fn gauged_curl_solve(mesh: &Mesh, bt: &SparseMatrix, f: &[f64], g: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    let e0 = mesh.interior_edges();
    let c0 = incidence(mesh, Incidence::Curl).submatrix(&all_ids(mesh.num_faces()), &e0);
    let mf = mass_matrix(mesh, FormDegree::Rt, &CoefficientField::identity(), Weight::Identity)?;
    let a = mf.congruence(&c0);
    let b = bt.submatrix(&all_ids(bt.rows()), &e0);
    let (x, _, st) = minres_saddle(&a, &b, f, g, cfg)?;
    Ok((x, st))
}

/// v ∈ NED with n×v = Λ, curl v = J (least squares in the RT mass norm) and
/// v orthogonal to ∇Θ⁰: weak div v = 0 and zero flux through every Γ_i.
pub fn vector_potential_tangential(mesh: &Mesh, j: &DofVector, lam: &[f64], cfg: &SolverConfig) -> Result<PotentialResult> {
    j.check(mesh, FormDegree::Rt)?;
    let vb = boundary_circulations(mesh, lam)?;
    let e0 = mesh.interior_edges();
    let c = incidence(mesh, Incidence::Curl);
    let mf = mass_matrix(mesh, FormDegree::Rt, &CoefficientField::identity(), Weight::Identity)?;
    let f: Vec<f64> = {
        let r = c.tr_mul_vec(&mf.mul_vec(&sub(&j.values, &c.mul_vec(&vb))));
        e0.iter().map(|&e| r[e]).collect()
    };
    let bt = theta0_gauge(mesh)?;
    let g: Vec<f64> = bt.mul_vec(&vb).iter().map(|x| -x).collect();
    let mut stats = Vec::new();
    let (vi, st) = gauged_curl_solve(mesh, &bt, &f, &g, cfg).map_err(|e| e.at_stage("vector potential (tangential)"))?;
    stage(&mut stats, "vector potential", st);
    let mut v = vb;
    for (k, &e) in e0.iter().enumerate() {
        v[e] = vi[k];
    }
    let cv = c.mul_vec(&v);
    let gauge = bt.mul_vec(&v);
    let certificates = vec![
        Diagnostic { name: "curl".into(), value: rel(norm(&sub(&cv, &j.values)), norm(&j.values) + norm(&c.abs_mul_vec(&v))), tolerance: 1e-8 },
        Diagnostic { name: "gauge".into(), value: rel(norm(&gauge), norm(&bt.abs_mul_vec(&v))), tolerance: 1e-8 },
    ];
    Ok(PotentialResult { field: DofVector::new(FormDegree::Ned, v), certificates, stats })
}

/// Diagnostics of an electric-type solution u ∈ NED: curl u − J (strong, in
/// RT), weak div(εu) − ρ against interior hats, and n×u − Λ.
pub fn electric_diagnostics(mesh: &Mesh, eps: &CoefficientField, u: &DofVector, j: &DofVector, rho: &DofVector, lam: &[f64]) -> Result<Vec<Diagnostic>> {
    let v0 = mesh.interior_vertices();
    let c = incidence(mesh, Incidence::Curl);
    let cu = c.mul_vec(&u.values);
    let m = mass_matrix(mesh, FormDegree::Ned, eps, Weight::Direct)?;
    let g = incidence(mesh, Incidence::Grad);
    let flux = g.tr_mul_vec(&m.mul_vec(&u.values));
    let fscale = g.abs_tr_mul_vec(&m.abs_mul_vec(&u.values));
    let load = p0_load(mesh, rho);
    let s: Vec<f64> = v0.iter().map(|&v| fscale[v] + load[v].abs()).collect();
    let a: Vec<f64> = v0.iter().map(|&v| flux[v]).collect();
    let b: Vec<f64> = v0.iter().map(|&v| -load[v]).collect();
    let vb = boundary_circulations(mesh, lam)?;
    let bdiff: Vec<f64> = mesh.boundary_edges().iter().map(|&e| u.values[e] - vb[e]).collect();
    Ok(vec![
        Diagnostic { name: "curl".into(), value: rel(norm(&sub(&cu, &j.values)), norm(&c.abs_mul_vec(&u.values)) + norm(&j.values)), tolerance: 1e-8 },
        Diagnostic { name: "div".into(), value: rel(norm(&sub(&a, &b)), norm(&s)), tolerance: 1e-8 },
        Diagnostic { name: "trace".into(), value: rel(norm(&bdiff), norm(lam) + norm(&u.values)), tolerance: 1e-8 },
    ])
}

/// u₀ = ∇q + v with v the tangential-gauge potential and q ∈ P1_0 solving
/// the ε-weighted Dirichlet problem −(ε∇q, ∇φ) = (ρ, φ) + (εv, ∇φ).
fn electric_particular(mesh: &Mesh, j: &DofVector, rho: &DofVector, lam: &[f64], eps: &CoefficientField, cfg: &SolverConfig) -> Result<(DofVector, Vec<StageStats>, bool)> {
    rho.check(mesh, FormDegree::P0)?;
    let pot = vector_potential_tangential(mesh, j, lam, cfg)?;
    let mut stats = pot.stats.clone();
    let v0 = mesh.interior_vertices();
    let g = incidence(mesh, Incidence::Grad);
    let m = mass_matrix(mesh, FormDegree::Ned, eps, Weight::Direct)?;
    let g0 = g.submatrix(&all_ids(mesh.num_edges()), &v0);
    let k = m.congruence(&g0);
    let load = p0_load(mesh, rho);
    let mv = g0.tr_mul_vec(&m.mul_vec(&pot.field.values));
    let rhs: Vec<f64> = v0.iter().enumerate().map(|(i, &v)| -load[v] - mv[i]).collect();
    let (q0, st) = cg_solve(&k, &rhs, cfg, None).map_err(|e| e.at_stage("scalar potential"))?;
    stage(&mut stats, "scalar potential", st);
    let mut u = pot.field.values.clone();
    crate::sparse::axpy(1.0, &g0.mul_vec(&q0), &mut u);
    let ok = pot.certificates.iter().all(Diagnostic::ok);
    Ok((DofVector::new(FormDegree::Ned, u), stats, ok))
}

/// Standard div-curl problem (ε = Id): curl u = J, div u = ρ, n×u = Λ.
pub fn solve_divcurl(mesh: &Mesh, j: &DofVector, rho: &DofVector, lam: &[f64], cfg: &SolverConfig) -> Result<PotentialResult> {
    let id = CoefficientField::identity();
    let (u, stats, ok) = electric_particular(mesh, j, rho, lam, &id, cfg)?;
    let mut certificates = electric_diagnostics(mesh, &id, &u, j, rho, lam)?;
    if !ok {
        certificates.push(Diagnostic { name: "potential".into(), value: f64::INFINITY, tolerance: 1e-8 });
    }
    Ok(PotentialResult { field: u, certificates, stats })
}

/// Particular solution of curl u = J, div(εu) = ρ, n×u = Λ in NED plus the
/// ε-harmonic family.
pub fn solve_electric(mesh: &Mesh, j: &DofVector, rho: &DofVector, lam: &[f64], eps: &CoefficientField, cfg: &SolverConfig) -> Result<SolutionBundle> {
    check_electric(mesh, j, rho, lam, 1e-8, DataClass::Discrete)?.into_result()?;
    let (u0, mut stats, ok) = electric_particular(mesh, j, rho, lam, eps, cfg)?;
    let basis = electric_basis(mesh, eps, cfg)?;
    stage(&mut stats, "harmonic basis", basis.stats);
    let diagnostics = electric_diagnostics(mesh, eps, &u0, j, rho, lam)?;
    let converged = ok && diagnostics.iter().all(Diagnostic::ok) && stats.iter().all(|s| s.stats.converged);
    Ok(SolutionBundle { u0, basis, diagnostics, stats, converged })
}

/// Add Σ c_i h_i to u₀.
pub fn family_member(bundle: &SolutionBundle, coeffs: &[f64]) -> Result<DofVector> {
    if coeffs.len() != bundle.basis.dim() {
        return Err(Error::Dimension { expected: bundle.basis.dim(), got: coeffs.len() });
    }
    let mut u = bundle.u0.clone();
    for (h, &c) in bundle.basis.fields.iter().zip(coeffs) {
        crate::sparse::axpy(c, &h.values, &mut u.values);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{manufactured, mesh_for_level, rotated_diagonal, DataSet, Shape, System};
    use crate::sparse::norm;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn zero_data_give_zero_particular_solution() {
        let m = mesh_for_level(Shape::Torus, 1).unwrap();
        let d = DataSet::zero(System::Magnetostatic, &m);
        let b = solve_magnetostatic(&m, &d.j, &d.rho, &d.lam, &rotated_diagonal(), &cfg()).unwrap();
        assert!(b.converged);
        assert_eq!(b.basis.dim(), 1);
        assert!(norm(&b.u0.values) < 1e-12);
    }

    #[test]
    fn family_members_share_diagnostics() {
        let m = mesh_for_level(Shape::Torus, 1).unwrap();
        let p = manufactured(2, &m).unwrap();
        let d = &p.data;
        let b = solve_magnetostatic(&m, &d.j, &d.rho, &d.lam, &p.coefficient, &cfg()).unwrap();
        assert!(b.converged, "{:?}", b.diagnostics);
        let u = family_member(&b, &[2.5]).unwrap();
        for (x, y) in b.diagnostics.iter().zip(magnetostatic_diagnostics(&m, &p.coefficient, &u, &d.j, &d.rho, &d.lam).unwrap()) {
            assert!(y.ok() && (x.value - y.value).abs() < 1e-8, "{} {} {}", x.name, x.value, y.value);
        }
        assert!(family_member(&b, &[]).is_err());
    }

    #[test]
    fn electric_solve_is_linear() {
        let m = mesh_for_level(Shape::Shell, 1).unwrap();
        let p = manufactured(5, &m).unwrap();
        let d = &p.data;
        let b1 = solve_electric(&m, &d.j, &d.rho, &d.lam, &p.coefficient, &cfg()).unwrap();
        let scale = |v: &DofVector| DofVector::new(v.degree, v.values.iter().map(|x| 2.0 * x).collect());
        let lam2: Vec<f64> = d.lam.iter().map(|x| 2.0 * x).collect();
        let b2 = solve_electric(&m, &scale(&d.j), &scale(&d.rho), &lam2, &p.coefficient, &cfg()).unwrap();
        assert!(b1.converged && b2.converged);
        assert_eq!(b1.basis.dim(), 1);
        let diff: Vec<f64> = b2.u0.values.iter().zip(&b1.u0.values).map(|(a, b)| a - 2.0 * b).collect();
        assert!(norm(&diff) <= 1e-7 * norm(&b2.u0.values));
    }

    #[test]
    fn incompatible_data_are_refused() {
        let m = mesh_for_level(Shape::Cube, 1).unwrap();
        let mut d = DataSet::zero(System::Magnetostatic, &m);
        d.rho.values.iter_mut().for_each(|x| *x = 1.0);
        let err = solve_magnetostatic(&m, &d.j, &d.rho, &d.lam, &CoefficientField::identity(), &cfg()).unwrap_err();
        assert!(matches!(err, Error::Compat(r) if r.failed() == ["meanBalance"]));
    }

    #[test]
    fn standard_divcurl_certificates() {
        let m = mesh_for_level(Shape::Cube, 2).unwrap();
        let p = manufactured(4, &m).unwrap();
        let d = &p.data;
        let r = solve_divcurl(&m, &d.j, &d.rho, &d.lam, &cfg()).unwrap();
        assert!(r.certificates.iter().all(Diagnostic::ok), "{:?}", r.certificates);
        let pot = vector_potential_normal(&m, &d.j, &cfg()).unwrap();
        assert!(pot.certificates.iter().all(Diagnostic::ok), "{:?}", pot.certificates);
    }
}
