//! Mesh, coefficient and data ingestion.

use std::path::Path;

use divcurl::compat::DataClass;
use divcurl::mesh::{generate_primitive, load_msh};
use divcurl::presets::{self, DataSet, System};
use divcurl::{CoefficientField, DofVector, FormDegree, Mat3, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::CliError;

pub fn load_mesh(spec: &str) -> Result<Mesh, CliError> {
    let name = spec.split(':').next().unwrap_or("");
    if matches!(name, "cube" | "shell" | "torus") && !Path::new(spec).exists() {
        return Ok(generate_primitive(&presets::parse_primitive(spec)?)?);
    }
    if !Path::new(spec).is_file() {
        return Err(CliError::Input(format!("mesh file '{spec}' does not exist")));
    }
    Ok(load_msh(spec)?)
}

fn read_numbers(path: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| CliError::Input(format!("{path}:{}: bad number '{t}'", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One value per entity, in entity order.
fn read_entity_values(path: &str, expected: usize) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = read_numbers(path)?.into_iter().flatten().collect();
    if values.len() != expected {
        return Err(CliError::Input(format!("{path}: expected {expected} values, found {}", values.len())));
    }
    Ok(values)
}

/// Per-cell coefficient file: one line per cell holding 1 (scalar), 3
/// (diagonal) or 9 (row-major) numbers.
fn coefficient_file(path: &str, mesh: &Mesh) -> Result<CoefficientField, CliError> {
    let rows = read_numbers(path)?;
    if rows.len() != mesh.num_tets() {
        return Err(CliError::Input(format!("{path}: expected {} cells, found {}", mesh.num_tets(), rows.len())));
    }
    let cells = rows
        .iter()
        .enumerate()
        .map(|(t, r)| match r.len() {
            1 => Ok(Mat3::identity() * r[0]),
            3 => Ok(Mat3::from_diagonal(&divcurl::Vec3::new(r[0], r[1], r[2]))),
            9 => Ok(Mat3::from_row_slice(r)),
            n => Err(CliError::Input(format!("{path}: cell {t} has {n} entries (want 1, 3 or 9)"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoefficientField::per_cell(cells)?.with_name(&format!("file:{path}")))
}

pub fn coefficient(spec: &str, mesh: &Mesh) -> Result<CoefficientField, CliError> {
    match spec.strip_prefix("file:") {
        Some(path) => coefficient_file(path, mesh),
        None => Ok(presets::parse_coefficient(spec, mesh)?),
    }
}

fn manufactured_index(spec: &str) -> Option<usize> {
    spec.strip_prefix("manufactured-").and_then(|k| k.parse().ok())
}

/// System, data and (for manufactured problems) a default coefficient.
pub struct Problem {
    pub data: DataSet,
    pub coefficient: Option<CoefficientField>,
}

fn named_dataset(spec: &str, system: System, mesh: &Mesh) -> Result<Problem, CliError> {
    let mut data = DataSet::zero(system, mesh);
    match spec {
        "zero" => {}
        "mean-mismatch" => {
            data = DataSet::zero(System::Magnetostatic, mesh);
            data.rho = presets::density("one", mesh)?;
        }
        "shell-flux" => {
            data = DataSet::zero(System::Magnetostatic, mesh);
            data.j = presets::current("radial-inverse-square", mesh)?;
        }
        "torus-circulation" => {
            data = DataSet::zero(System::Electric, mesh);
            data.lam = presets::poloidal_circulations(mesh);
        }
        _ => {
            if let Some(k) = manufactured_index(spec) {
                let m = presets::manufactured(k, mesh)?;
                return Ok(Problem { data: m.data, coefficient: Some(m.coefficient) });
            }
            if let Some(path) = spec.strip_prefix("file:") {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
                let data: DataSet = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
                return Ok(Problem { data, coefficient: None });
            }
            return Err(CliError::Input(format!("unknown dataset '{spec}'")));
        }
    }
    Ok(Problem { data, coefficient: None })
}

/// Data for `check` and `solve`: a named dataset (or zero) with the
/// component flags applied on top.
pub fn problem(cfg: &RunConfig, mesh: &Mesh) -> Result<Problem, CliError> {
    let requested = cfg.system.as_deref().map(System::parse).transpose()?;
    let mut p = named_dataset(cfg.data.as_deref().unwrap_or("zero"), requested.unwrap_or(System::Magnetostatic), mesh)?;
    if let Some(s) = requested {
        if s != p.data.system {
            return Err(CliError::Input(format!("dataset '{}' belongs to the {} system", cfg.data.as_deref().unwrap_or("zero"), p.data.system.name())));
        }
    }
    let d = &mut p.data;
    if let Some(spec) = &cfg.current {
        d.j = match spec.strip_prefix("file:") {
            Some(path) => DofVector::new(FormDegree::Rt, read_entity_values(path, mesh.num_faces())?),
            None => presets::current(spec, mesh)?,
        };
        if spec != "zero" && spec != "radial-inverse-square" && !spec.starts_with("file:") {
            d.class = DataClass::Interpolated;
        }
    }
    if let Some(spec) = &cfg.rho {
        d.rho = match spec.strip_prefix("file:") {
            Some(path) => DofVector::new(FormDegree::P0, read_entity_values(path, mesh.num_tets())?),
            None => presets::density(spec, mesh)?,
        };
    }
    if let Some(spec) = &cfg.lambda {
        let n = match d.system {
            System::Magnetostatic => mesh.boundary_faces().len(),
            System::Electric => mesh.boundary_edges().len(),
        };
        d.lam = match (spec.strip_prefix("file:"), d.system) {
            (Some(path), _) => read_entity_values(path, n)?,
            (None, System::Magnetostatic) => presets::normal_data(spec, mesh)?,
            (None, System::Electric) => presets::tangential_data(spec, mesh)?,
        };
    }
    Ok(p)
}

/// Input field for `decompose`: `random` (seeded), a vector field preset
/// or `file:<path>` with one value per face (magnetic) or edge (electric).
pub fn field(spec: &str, degree: FormDegree, seed: u64, mesh: &Mesh) -> Result<DofVector, CliError> {
    let n = degree.dim(mesh);
    if spec == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(DofVector::new(degree, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return Ok(DofVector::new(degree, read_entity_values(path, n)?));
    }
    let f = presets::vector_field(spec).ok_or_else(|| CliError::Input(format!("unknown field '{spec}'")))?;
    Ok(divcurl::whitney::interpolate_vector(mesh, degree, &f))
}
