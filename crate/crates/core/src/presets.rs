//! Named meshes, coefficients, analytic fields and data sets.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compat::DataClass;
use crate::geometry::solid_angle;
use crate::whitney::{incidence, interpolate_scalar, interpolate_vector, trace_normal, trace_tangential, CoefficientField, DofVector, FormDegree, Incidence};
use crate::{Error, Mat3, Mesh, Primitive, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Magnetostatic,
    Electric,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Magnetostatic => "magnetostatic",
            System::Electric => "electric",
        }
    }

    pub fn parse(s: &str) -> Result<System> {
        match s {
            "magnetostatic" | "magnetic" => Ok(System::Magnetostatic),
            "electric" => Ok(System::Electric),
            _ => Err(Error::Degenerate(format!("unknown system '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Cube,
    Shell,
    Torus,
}

/// Refinement level → primitive: cube(2^L), shell and torus with refinement L.
pub fn primitive_for_level(shape: Shape, level: usize) -> Primitive {
    match shape {
        Shape::Cube => Primitive::Cube { n: 1 << level },
        Shape::Shell => Primitive::SphericalShell { r_in: 1.0, r_out: 2.0, refinement: level },
        Shape::Torus => Primitive::SolidTorus { major: 2.0, minor: 0.5, refinement: level, with_cut: true },
    }
}

pub fn mesh_for_level(shape: Shape, level: usize) -> Result<Mesh> {
    crate::mesh::generate_primitive(&primitive_for_level(shape, level))
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| Error::Degenerate(format!("bad number '{t}'")))).collect()
}

fn count(x: f64) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Error::Degenerate(format!("expected a positive integer, got {x}")))
    }
}

/// Parse `cube[:n]`, `shell[:rin,rout,k]` or `torus[:R,r,k[,cut|nocut]]`.
/// Bare names select level 2.
pub fn parse_primitive(spec: &str) -> Result<Primitive> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    match (name, args.is_empty()) {
        ("cube", true) => Ok(primitive_for_level(Shape::Cube, 2)),
        ("shell", true) => Ok(primitive_for_level(Shape::Shell, 2)),
        ("torus", true) => Ok(primitive_for_level(Shape::Torus, 2)),
        ("cube", false) => Ok(Primitive::Cube { n: count(numbers(args)?.first().copied().unwrap_or(0.0))? }),
        ("shell", false) => match numbers(args)?.as_slice() {
            &[r_in, r_out, k] => Ok(Primitive::SphericalShell { r_in, r_out, refinement: count(k)? }),
            _ => Err(Error::Degenerate("shell spec is shell:rin,rout,k".into())),
        },
        ("torus", false) => {
            let mut parts: Vec<&str> = args.split(',').collect();
            let with_cut = match parts.last().map(|s| s.trim()) {
                Some("cut") => {
                    parts.pop();
                    true
                }
                Some("nocut") => {
                    parts.pop();
                    false
                }
                _ => true,
            };
            match numbers(&parts.join(","))?.as_slice() {
                &[major, minor, k] => Ok(Primitive::SolidTorus { major, minor, refinement: count(k)?, with_cut }),
                _ => Err(Error::Degenerate("torus spec is torus:R,r,k[,cut]".into())),
            }
        }
        _ => Err(Error::Degenerate(format!("unknown primitive '{spec}'"))),
    }
}

/// Rotation by `angle` about the unit axis `a`.
fn rotation(a: Vec3, angle: f64) -> Mat3 {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(a), angle).into_inner()
}

/// diag(1,1,2) rotated by 30° about (1,1,1).
pub fn rotated_diagonal() -> CoefficientField {
    let r = rotation(Vec3::new(1.0, 1.0, 1.0), PI / 6.0);
    let a = r * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 2.0)) * r.transpose();
    CoefficientField::constant(a).expect("SPD").with_name("rotated")
}

/// I + ½ d dᵀ with d = (1,1,1)/√3.
pub fn rank_one_update() -> CoefficientField {
    let d = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
    CoefficientField::constant(Mat3::identity() + 0.5 * d * d.transpose()).expect("SPD").with_name("rank-one")
}

/// Smoothly varying field (1 + x²) I + ½ e_z e_zᵀ.
pub fn smooth_variable() -> CoefficientField {
    CoefficientField::analytic("smooth", false, |x: &Vec3| Mat3::identity() * (1.0 + x.x * x.x) + Mat3::from_diagonal(&Vec3::new(0.0, 0.0, 0.5)))
}

/// Per-cell SPD field 0.5·I + B Bᵀ with B uniform in [−1, 1]^{3×3}.
pub fn random_spd(mesh: &Mesh, seed: u64) -> CoefficientField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = (0..mesh.num_tets())
        .map(|_| {
            let b = Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            Mat3::identity() * 0.5 + b * b.transpose()
        })
        .collect();
    CoefficientField::per_cell(cells).expect("SPD").with_name(&format!("random:{seed}"))
}

/// `identity`, `diagonal(a,b,c)`, `rotated`, `rank-one`, `smooth` or `random:<seed>`.
pub fn parse_coefficient(spec: &str, mesh: &Mesh) -> Result<CoefficientField> {
    let s = spec.trim();
    if let Some(args) = s.strip_prefix("diagonal(").and_then(|r| r.strip_suffix(')')) {
        return match numbers(args)?.as_slice() {
            &[a, b, c] => Ok(CoefficientField::diagonal(a, b, c)?.with_name(s)),
            _ => Err(Error::Coefficient("diagonal needs three entries".into())),
        };
    }
    if let Some(seed) = s.strip_prefix("random:") {
        let seed = seed.parse::<u64>().map_err(|_| Error::Coefficient(format!("bad seed in '{s}'")))?;
        return Ok(random_spd(mesh, seed));
    }
    match s {
        "identity" => Ok(CoefficientField::identity()),
        "rotated" => Ok(rotated_diagonal()),
        "rank-one" => Ok(rank_one_update()),
        "smooth" => Ok(smooth_variable()),
        _ => Err(Error::Coefficient(format!("unknown coefficient '{s}'"))),
    }
}

/// e_φ/(2π ρ): curl-free, divergence-free, unit circulation about the z axis.
pub fn azimuthal(x: &Vec3) -> Vec3 {
    let r2 = x.x * x.x + x.y * x.y;
    Vec3::new(-x.y, x.x, 0.0) / (2.0 * PI * r2)
}

/// x/|x|³.
pub fn radial_inverse_square(x: &Vec3) -> Vec3 {
    x / x.norm().powi(3)
}

/// Flux-normalized harmonic field of the shell 1 ≤ r ≤ 2, −x/(4π|x|³).
pub fn shell_harmonic(x: &Vec3) -> Vec3 {
    -radial_inverse_square(x) / (4.0 * PI)
}

/// Its potential, 1/(4π)(1/r − 1/2), vanishing on the outer sphere.
pub fn shell_potential(x: &Vec3) -> f64 {
    (1.0 / x.norm() - 0.5) / (4.0 * PI)
}

pub fn vector_field(name: &str) -> Option<fn(&Vec3) -> Vec3> {
    Some(match name {
        "azimuthal" => azimuthal,
        "radial-inverse-square" => radial_inverse_square,
        "rotation" => |x: &Vec3| Vec3::new(-x.y, x.x, 0.0),
        "uniform-z" => |_: &Vec3| Vec3::new(0.0, 0.0, 2.0),
        _ => return None,
    })
}

fn unknown(kind: &str, spec: &str) -> Error {
    Error::Degenerate(format!("unknown {kind} preset '{spec}'"))
}

/// RT current: `zero`, a named vector field, or `radial-inverse-square` with
/// exact fluxes (signed solid angles seen from the origin).
pub fn current(spec: &str, mesh: &Mesh) -> Result<DofVector> {
    match spec {
        "zero" => Ok(DofVector::zeros(FormDegree::Rt, mesh)),
        "radial-inverse-square" => {
            let o = Vec3::zeros();
            let x = mesh.vertices();
            let values = mesh.faces().iter().map(|&[a, b, c]| solid_angle(&o, &x[a], &x[b], &x[c])).collect();
            Ok(DofVector::new(FormDegree::Rt, values))
        }
        _ => vector_field(spec).map(|f| interpolate_vector(mesh, FormDegree::Rt, &f)).ok_or_else(|| unknown("current", spec)),
    }
}

/// P0 density: `zero`, `one` or a constant.
pub fn density(spec: &str, mesh: &Mesh) -> Result<DofVector> {
    let c = match spec {
        "zero" => 0.0,
        "one" => 1.0,
        _ => spec.parse::<f64>().map_err(|_| unknown("density", spec))?,
    };
    Ok(DofVector::new(FormDegree::P0, vec![c; mesh.num_tets()]))
}

/// Normal boundary data λ per boundary face: `zero` or a named vector field.
pub fn normal_data(spec: &str, mesh: &Mesh) -> Result<Vec<f64>> {
    match spec {
        "zero" => Ok(vec![0.0; mesh.boundary_faces().len()]),
        _ => {
            let f = vector_field(spec).ok_or_else(|| unknown("normal data", spec))?;
            trace_normal(mesh, &interpolate_vector(mesh, FormDegree::Rt, &f))
        }
    }
}

/// Poloidal angle about the torus centre circle, wrapped edge differences / 2π.
pub fn poloidal_circulations(mesh: &Mesh) -> Vec<f64> {
    let rho = |x: &Vec3| (x.x * x.x + x.y * x.y).sqrt();
    let (lo, hi) = mesh.vertices().iter().map(rho).fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(r), h.max(r)));
    let centre = 0.5 * (lo + hi);
    let theta = |x: &Vec3| x.z.atan2(rho(x) - centre);
    mesh.boundary_edges()
        .iter()
        .map(|&e| {
            let [a, b] = mesh.edges()[e];
            let d = theta(&mesh.vertices()[b]) - theta(&mesh.vertices()[a]);
            (d + PI).rem_euclid(2.0 * PI) - PI
        })
        .map(|d| d / (2.0 * PI))
        .collect()
}

/// Tangential boundary data Λ per boundary edge: `zero`, `poloidal` or a named vector field.
pub fn tangential_data(spec: &str, mesh: &Mesh) -> Result<Vec<f64>> {
    match spec {
        "zero" => Ok(vec![0.0; mesh.boundary_edges().len()]),
        "poloidal" => Ok(poloidal_circulations(mesh)),
        _ => {
            let f = vector_field(spec).ok_or_else(|| unknown("tangential data", spec))?;
            trace_tangential(mesh, &interpolate_vector(mesh, FormDegree::Ned, &f))
        }
    }
}

/// Right-hand side of either system. `lam` is λ per boundary face for the
/// magnetostatic system and Λ per boundary edge for the electric one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub system: System,
    pub j: DofVector,
    pub rho: DofVector,
    pub lam: Vec<f64>,
    pub class: DataClass,
}

impl DataSet {
    pub fn zero(system: System, mesh: &Mesh) -> DataSet {
        let lam = match system {
            System::Magnetostatic => vec![0.0; mesh.boundary_faces().len()],
            System::Electric => vec![0.0; mesh.boundary_edges().len()],
        };
        DataSet { system, j: DofVector::zeros(FormDegree::Rt, mesh), rho: DofVector::zeros(FormDegree::P0, mesh), lam, class: DataClass::Discrete }
    }
}

/// C·e with entries at round-off level relative to their summands set to
/// zero, so the curl of an interpolated gradient is exactly zero.
pub fn exact_curl(mesh: &Mesh, e: &DofVector) -> Vec<f64> {
    let c = incidence(mesh, Incidence::Curl);
    let scale = c.abs_mul_vec(&e.values);
    c.mul_vec(&e.values).into_iter().zip(scale).map(|(v, s)| if v.abs() <= 64.0 * f64::EPSILON * s { 0.0 } else { v }).collect()
}

pub type VectorFn = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

/// Manufactured problem with known solution.
#[derive(Clone)]
pub struct Manufactured {
    pub name: String,
    pub coefficient: CoefficientField,
    pub data: DataSet,
    pub exact: VectorFn,
}

pub const MANUFACTURED: usize = 6;

/// Problems 1–3 are magnetostatic, 4–6 electric. Data are built from the
/// canonical interpolants so the discrete compatibility conditions hold
/// exactly: J = C·I_NED(σu), ρ = D·I_RT(u)/|T|, λ = I_RT(u)·n for the
/// magnetostatic system; J = C·I_NED(u), Λ = n×I_NED(u) and ρ the cell
/// average of div(εu) for the electric one.
pub fn manufactured(k: usize, mesh: &Mesh) -> Result<Manufactured> {
    type Scalar = Option<fn(&Vec3) -> f64>;
    // (system, coefficient, u, ρ for the electric system, potential when u is a gradient)
    let (system, coefficient, exact, rho, potential): (System, CoefficientField, VectorFn, Scalar, Scalar) = match k {
        1 => (System::Magnetostatic, CoefficientField::identity(), Arc::new(|x: &Vec3| Vec3::new(2.0 * x.x, -2.0 * x.y, 0.0)), None, Some(|x: &Vec3| x.x * x.x - x.y * x.y)),
        2 => (System::Magnetostatic, CoefficientField::diagonal(1.0, 2.0, 3.0)?, Arc::new(|x: &Vec3| Vec3::new(x.x * x.y, x.y * x.z, x.z * x.x)), None, None),
        3 => (System::Magnetostatic, smooth_variable(), Arc::new(|x: &Vec3| Vec3::new(x.y.cos(), x.z.sin(), x.x * x.y)), None, None),
        4 => (System::Electric, CoefficientField::identity(), Arc::new(|x: &Vec3| Vec3::new(x.x * x.z, -x.y * x.z, 0.0)), Some(|_: &Vec3| 0.0), None),
        5 => (
            System::Electric,
            CoefficientField::diagonal(1.0, 2.0, 3.0)?,
            Arc::new(|x: &Vec3| Vec3::new(x.x * x.x, x.y * x.y, x.z * x.z)),
            Some(|x: &Vec3| 2.0 * x.x + 4.0 * x.y + 6.0 * x.z),
            None,
        ),
        6 => (
            System::Electric,
            rank_one_update(),
            Arc::new(|x: &Vec3| Vec3::new(x.x.cos() * x.y.sinh(), x.x.sin() * x.y.cosh(), 0.0)),
            Some(|x: &Vec3| x.x.cos() * x.y.cosh() / 3.0),
            Some(|x: &Vec3| x.x.sin() * x.y.sinh()),
        ),
        _ => return Err(Error::BadId { index: k, count: MANUFACTURED }),
    };
    let u = |x: &Vec3| exact(x);
    // edge interpolant of u, through the commuting P1 route for gradients
    let ned_u = || match potential {
        Some(phi) => DofVector::new(FormDegree::Ned, incidence(mesh, Incidence::Grad).mul_vec(&interpolate_scalar(mesh, FormDegree::P1, &phi).values)),
        None => interpolate_vector(mesh, FormDegree::Ned, &u),
    };
    let data = match system {
        System::Magnetostatic => {
            // none of these coefficients is per-cell, so the cell index is irrelevant
            let su = |x: &Vec3| coefficient.eval(mesh, 0, x) * exact(x);
            let j = if coefficient.is_identity() { exact_curl(mesh, &ned_u()) } else { exact_curl(mesh, &interpolate_vector(mesh, FormDegree::Ned, &su)) };
            let iu = interpolate_vector(mesh, FormDegree::Rt, &u);
            let div = incidence(mesh, Incidence::Div).mul_vec(&iu.values);
            let rho = div.iter().zip(mesh.volumes()).map(|(d, v)| d / v).collect();
            DataSet { system, j: DofVector::new(FormDegree::Rt, j), rho: DofVector::new(FormDegree::P0, rho), lam: trace_normal(mesh, &iu)?, class: DataClass::Discrete }
        }
        System::Electric => {
            let iu = ned_u();
            let j = exact_curl(mesh, &iu);
            let rho = interpolate_scalar(mesh, FormDegree::P0, &rho.unwrap());
            DataSet { system, j: DofVector::new(FormDegree::Rt, j), rho, lam: trace_tangential(mesh, &iu)?, class: DataClass::Discrete }
        }
    };
    Ok(Manufactured { name: format!("manufactured-{k}"), coefficient, data, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::{check_electric, check_magnetostatic};

    #[test]
    fn primitive_specs() {
        assert_eq!(parse_primitive("cube:3").unwrap(), Primitive::Cube { n: 3 });
        assert_eq!(parse_primitive("cube").unwrap(), Primitive::Cube { n: 4 });
        assert_eq!(parse_primitive("torus:3,1,2,nocut").unwrap(), Primitive::SolidTorus { major: 3.0, minor: 1.0, refinement: 2, with_cut: false });
        assert_eq!(parse_primitive("shell:1,3,1").unwrap(), Primitive::SphericalShell { r_in: 1.0, r_out: 3.0, refinement: 1 });
        for bad in ["cube:0", "cube:1.5", "shell:1,2", "torus:a,b,c", "sphere"] {
            assert!(parse_primitive(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn coefficient_specs() {
        let m = mesh_for_level(Shape::Cube, 1).unwrap();
        let (lo, hi) = parse_coefficient("diagonal(1,2,3)", &m).unwrap().bounds(&m).unwrap();
        assert_eq!((lo, hi), (1.0, 3.0));
        let (lo, hi) = rotated_diagonal().bounds(&m).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert_eq!(random_spd(&m, 5).eval(&m, 3, &Vec3::zeros()), random_spd(&m, 5).eval(&m, 3, &Vec3::zeros()));
        assert!(random_spd(&m, 5).bounds(&m).unwrap().0 >= 0.5 - 1e-12);
        assert!(parse_coefficient("diagonal(1,-2,3)", &m).is_err());
        assert!(parse_coefficient("random:x", &m).is_err());
        assert!(parse_coefficient("unknown", &m).is_err());
    }

    #[test]
    fn manufactured_data_are_compatible() {
        let m = mesh_for_level(Shape::Cube, 1).unwrap();
        for k in 1..=MANUFACTURED {
            let p = manufactured(k, &m).unwrap();
            let d = &p.data;
            let r = match d.system {
                System::Magnetostatic => check_magnetostatic(&m, &d.j, &d.rho, &d.lam, 1e-8, d.class),
                System::Electric => check_electric(&m, &d.j, &d.rho, &d.lam, 1e-8, d.class),
            }
            .unwrap();
            assert!(r.pass, "{}: {:?}", p.name, r.failed());
        }
        assert!(manufactured(0, &m).is_err() && manufactured(MANUFACTURED + 1, &m).is_err());
    }

    #[test]
    fn shell_solid_angle_fluxes() {
        let m = mesh_for_level(Shape::Shell, 1).unwrap();
        let j = current("radial-inverse-square", &m).unwrap();
        let r = check_magnetostatic(&m, &j, &density("zero", &m).unwrap(), &normal_data("zero", &m).unwrap(), 1e-8, DataClass::Discrete).unwrap();
        assert_eq!(r.failed(), ["gammaFlux_0", "gammaFlux_1"]);
        assert!((r.get("gammaFlux_0").unwrap().value.abs() - 4.0 * PI).abs() < 1e-9);
        assert!((r.get("gammaFlux_1").unwrap().value.abs() - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn poloidal_circulation_fails_only_the_cut() {
        let m = mesh_for_level(Shape::Torus, 1).unwrap();
        let d = DataSet::zero(System::Electric, &m);
        let r = check_electric(&m, &d.j, &d.rho, &tangential_data("poloidal", &m).unwrap(), 1e-8, DataClass::Discrete).unwrap();
        assert_eq!(r.failed(), ["cutCirculation_1", "harmonicPairing_1"]);
        assert!((r.get("cutCirculation_1").unwrap().value.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_presets() {
        let m = mesh_for_level(Shape::Cube, 1).unwrap();
        assert!(current("nope", &m).is_err());
        assert!(density("many", &m).is_err());
        assert!(normal_data("nope", &m).is_err());
        assert!(tangential_data("nope", &m).is_err());
        assert!(System::parse("thermal").is_err());
    }
}
