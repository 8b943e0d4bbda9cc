//! Legacy ASCII VTK export on the tetrahedral grid.

use std::fmt::Write as _;
use std::path::Path;

use divcurl::whitney::{scalar_at, vector_at};
use divcurl::{DofVector, FormDegree, Mesh};

use crate::CliError;

const CENTROID: [f64; 4] = [0.25; 4];

pub enum Data {
    /// Values at the vertices.
    Point(Vec<f64>),
    PointVector(Vec<[f64; 3]>),
    /// Values per cell.
    Cell(Vec<f64>),
    CellVector(Vec<[f64; 3]>),
}

/// P1 → point scalars, P0 → cell scalars, NED/RT → cell vectors
/// (centroid value, which is the cell average of a Whitney field).
pub fn from_dofs(mesh: &Mesh, v: &DofVector) -> Data {
    match v.degree {
        FormDegree::P1 => Data::Point(v.values.clone()),
        FormDegree::P0 => Data::Cell((0..mesh.num_tets()).map(|t| scalar_at(mesh, v, t, &CENTROID)).collect()),
        FormDegree::Ned | FormDegree::Rt => Data::CellVector(
            (0..mesh.num_tets())
                .map(|t| {
                    let u = vector_at(mesh, v, t, &CENTROID);
                    [u.x, u.y, u.z]
                })
                .collect(),
        ),
    }
}

pub fn render(mesh: &Mesh, name: &str, data: &Data) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", p.x, p.y, p.z);
    }
    let n = mesh.num_tets();
    let _ = writeln!(s, "CELLS {n} {}", 5 * n);
    for t in mesh.tets() {
        let _ = writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        s.push_str("10\n");
    }
    match data {
        Data::Point(v) => {
            let _ = writeln!(s, "POINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", v.len());
            v.iter().for_each(|x| {
                let _ = writeln!(s, "{x:e}");
            });
        }
        Data::Cell(v) => {
            let _ = writeln!(s, "CELL_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", v.len());
            v.iter().for_each(|x| {
                let _ = writeln!(s, "{x:e}");
            });
        }
        Data::PointVector(v) | Data::CellVector(v) => {
            let head = if matches!(data, Data::PointVector(_)) { "POINT_DATA" } else { "CELL_DATA" };
            let _ = writeln!(s, "{head} {}\nVECTORS {name} double", v.len());
            v.iter().for_each(|x| {
                let _ = writeln!(s, "{:e} {:e} {:e}", x[0], x[1], x[2]);
            });
        }
    }
    s
}

pub fn write(dir: &Path, mesh: &Mesh, name: &str, data: &Data) -> Result<String, CliError> {
    let file = format!("{name}.vtk");
    std::fs::write(dir.join(&file), render(mesh, name, data)).map_err(|e| CliError::Input(format!("cannot write {file}: {e}")))?;
    Ok(file)
}
