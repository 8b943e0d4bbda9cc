use std::collections::BTreeMap;
use std::path::Path;

use divcurl::compat::{check_electric, check_magnetostatic, CompatReport};
use divcurl::decompose::{hw_electric, hw_magnetic};
use divcurl::friedrichs::{friedrichs_constant, FriedrichsConfig, FriedrichsKind, RForm, TraceNorm};
use divcurl::harmonic::{electric_basis, magnetic_basis, HarmonicBasis};
use divcurl::linsolve::SolverConfig;
use divcurl::mesh::{euler_characteristic, mesh_quality};
use divcurl::presets::{DataSet, System};
use divcurl::solve::{solve_electric, solve_magnetostatic, StageStats};
use divcurl::{CoefficientField, FormDegree, Mesh};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{inputs, vtk, CliError};

/// Command-specific part of a report.
pub struct Outcome {
    pub results: Value,
    pub residuals: BTreeMap<String, f64>,
    pub iterations: usize,
    pub exit: i32,
    /// Reason for a nonzero exit.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(results: Value, residuals: BTreeMap<String, f64>, iterations: usize) -> Self {
        Outcome { results, residuals, iterations, exit: 0, message: None }
    }
}

fn total_iterations(stats: &[StageStats]) -> usize {
    stats.iter().map(|s| s.stats.iterations).sum()
}

fn export(out: &Path, mesh: &Mesh, name: &str, v: &divcurl::DofVector, files: &mut Vec<String>) -> Result<(), CliError> {
    files.push(vtk::write(out, mesh, name, &vtk::from_dofs(mesh, v))?);
    Ok(())
}

pub fn mesh_info(mesh: &Mesh) -> Outcome {
    let q = mesh_quality(mesh);
    let results = json!({
        "edges": mesh.num_edges(),
        "faces": mesh.num_faces(),
        "boundary_faces": mesh.boundary_faces().len(),
        "boundary_components": mesh.boundary_components().len(),
        "cuts": mesh.cuts().len(),
        "euler_characteristic": euler_characteristic(mesh),
        "quality": {
            "min_dihedral": q.min_dihedral,
            "max_dihedral": q.max_dihedral,
            "min_edge": q.min_edge,
            "max_edge": q.max_edge,
        },
    });
    Outcome::ok(results, BTreeMap::new(), 0)
}

fn compat(mesh: &Mesh, data: &DataSet, tol: f64) -> Result<CompatReport, CliError> {
    Ok(match data.system {
        System::Magnetostatic => check_magnetostatic(mesh, &data.j, &data.rho, &data.lam, tol, data.class)?,
        System::Electric => check_electric(mesh, &data.j, &data.rho, &data.lam, tol, data.class)?,
    })
}

fn compat_outcome(report: &CompatReport, extra: Value) -> Outcome {
    let residuals = report.conditions.iter().map(|c| (c.name.clone(), c.residual)).collect();
    let failed = report.failed();
    let mut results = json!({ "system": report.system, "pass": report.pass, "failed": failed, "compat": report });
    if let (Value::Object(r), Value::Object(e)) = (&mut results, extra) {
        r.extend(e);
    }
    let message = (!report.pass).then(|| format!("data fail compatibility conditions: {}", failed.join(", ")));
    Outcome { results, residuals, iterations: 0, exit: if report.pass { 0 } else { 2 }, message }
}

pub fn check(cfg: &RunConfig, mesh: &Mesh, data: &DataSet) -> Result<Outcome, CliError> {
    let report = compat(mesh, data, cfg.tol)?;
    Ok(compat_outcome(&report, json!({ "data": cfg.data.as_deref().unwrap_or("zero") })))
}

fn basis_kind(cfg: &RunConfig) -> Result<System, CliError> {
    match cfg.kind.as_deref().unwrap_or("magnetic") {
        "magnetic" => Ok(System::Magnetostatic),
        "electric" => Ok(System::Electric),
        k => Err(CliError::Input(format!("--kind must be magnetic or electric here, got '{k}'"))),
    }
}

fn basis_json(b: &HarmonicBasis) -> Value {
    json!({
        "kind": b.kind,
        "dimension": b.dim(),
        "gram": b.gram,
        "gram_error": b.gram_error(),
        "gamma0_flux": b.gamma0_flux,
    })
}

fn export_basis(out: &Path, mesh: &Mesh, b: &HarmonicBasis, files: &mut Vec<String>) -> Result<(), CliError> {
    for (k, h) in b.fields.iter().enumerate() {
        export(out, mesh, &format!("basis_{k}"), h, files)?;
    }
    for (k, q) in b.potentials.iter().enumerate() {
        export(out, mesh, &format!("potential_{k}"), q, files)?;
    }
    Ok(())
}

pub fn basis(cfg: &RunConfig, mesh: &Mesh, coeff: &CoefficientField, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let b = match basis_kind(cfg)? {
        System::Magnetostatic => magnetic_basis(mesh, coeff, solver)?,
        System::Electric => electric_basis(mesh, coeff, solver)?,
    };
    let mut files = Vec::new();
    export_basis(&cfg.out, mesh, &b, &mut files)?;
    let mut results = basis_json(&b);
    results["files"] = json!(files);
    let residuals = BTreeMap::from([("gramError".to_string(), b.gram_error())]);
    Ok(Outcome::ok(results, residuals, b.stats.iterations))
}

pub fn solve(cfg: &RunConfig, mesh: &Mesh, data: &DataSet, coeff: &CoefficientField, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let report = compat(mesh, data, cfg.tol)?;
    if !report.pass {
        return Ok(compat_outcome(&report, json!({ "data": cfg.data.as_deref().unwrap_or("zero") })));
    }
    let bundle = match data.system {
        System::Magnetostatic => solve_magnetostatic(mesh, &data.j, &data.rho, &data.lam, coeff, solver)?,
        System::Electric => solve_electric(mesh, &data.j, &data.rho, &data.lam, coeff, solver)?,
    };
    let mut files = Vec::new();
    export(&cfg.out, mesh, "u0", &bundle.u0, &mut files)?;
    export_basis(&cfg.out, mesh, &bundle.basis, &mut files)?;
    let u0_max = bundle.u0.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let results = json!({
        "system": data.system.name(),
        "data": cfg.data.as_deref().unwrap_or("zero"),
        "family_dimension": bundle.basis.dim(),
        "u0_max_dof": u0_max,
        "converged": bundle.converged,
        "diagnostics": bundle.diagnostics,
        "stages": bundle.stats,
        "basis": basis_json(&bundle.basis),
        "files": files,
    });
    let residuals = bundle.diagnostics.iter().map(|d| (d.name.clone(), d.value)).collect();
    let mut out = Outcome::ok(results, residuals, total_iterations(&bundle.stats) + bundle.basis.stats.iterations);
    if !bundle.converged {
        out.exit = 3;
        out.message = Some("solve did not meet its diagnostics".into());
    }
    Ok(out)
}

pub fn decompose(cfg: &RunConfig, mesh: &Mesh, coeff: &CoefficientField, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let kind = basis_kind(cfg)?;
    let degree = if kind == System::Magnetostatic { FormDegree::Rt } else { FormDegree::Ned };
    let spec = cfg.data.as_deref().unwrap_or("random");
    let u = inputs::field(spec, degree, cfg.seed, mesh)?;
    let r = match kind {
        System::Magnetostatic => hw_magnetic(mesh, &u, coeff, solver)?,
        System::Electric => hw_electric(mesh, &u, coeff, solver)?,
    };
    let mut files = Vec::new();
    for (name, v) in [("u", &u), ("h", &r.h), ("gradient_part", &r.gradient_part), ("curl_part", &r.curl_part), ("chi", &r.chi), ("w", &r.w)] {
        export(&cfg.out, mesh, name, v, &mut files)?;
    }
    let mut residuals = BTreeMap::from([("reconstruction".to_string(), r.reconstruction), ("potential".to_string(), r.potential_residual)]);
    residuals.extend(r.pairings.iter().map(|p| (p.name.clone(), p.residual)));
    let results = json!({
        "kind": r.kind,
        "data": spec,
        "coefficients": r.coefficients,
        "reconstruction": r.reconstruction,
        "potential_residual": r.potential_residual,
        "pairings": r.pairings,
        "norms": r.norms.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "stages": r.stats,
        "files": files,
    });
    let ok = r.reconstruction <= cfg.tol && r.max_pairing() <= cfg.tol;
    let mut out = Outcome::ok(results, residuals, total_iterations(&r.stats));
    if !ok {
        out.exit = 3;
        out.message = Some(format!("decomposition residuals exceed {:e}", cfg.tol));
    }
    Ok(out)
}

fn friedrichs_config(cfg: &RunConfig) -> Result<FriedrichsConfig, CliError> {
    let kind = match cfg.kind.as_deref().unwrap_or("normal") {
        "normal" => FriedrichsKind::Normal,
        "tangential" => FriedrichsKind::Tangential,
        k => Err(CliError::Input(format!("--kind must be normal or tangential here, got '{k}'")))?,
    };
    let form = match cfg.form.as_str() {
        "with-l2" => RForm::WithL2,
        "without-l2" => RForm::WithoutL2,
        "cut-flux" => RForm::CutFlux,
        f => Err(CliError::Input(format!("unknown --form '{f}'")))?,
    };
    let trace = match cfg.trace.as_str() {
        "mesh-weighted" => TraceNorm::MeshWeighted,
        "l2" => TraceNorm::L2,
        t => Err(CliError::Input(format!("unknown --trace '{t}'")))?,
    };
    Ok(FriedrichsConfig { kind, form, trace, p: cfg.p, seed: cfg.seed })
}

pub fn friedrichs(cfg: &RunConfig, mesh: &Mesh, coeff: &CoefficientField, solver: &SolverConfig) -> Result<Outcome, CliError> {
    let fc = friedrichs_config(cfg)?;
    let e = friedrichs_constant(mesh, coeff, &fc, solver)?;
    let files = vec![vtk::write(&cfg.out, mesh, "extremal", &vtk::Data::PointVector(e.extremal.clone()))?];
    let results = json!({
        "kind": e.kind,
        "form": e.form,
        "trace": e.trace,
        "p": e.p,
        "constant": e.constant,
        "lower_bound": e.lower_bound,
        "eigen_residual": e.eigen_residual,
        "files": files,
    });
    let residuals = BTreeMap::from([("eigenResidual".to_string(), e.eigen_residual)]);
    Ok(Outcome::ok(results, residuals, e.iterations))
}
