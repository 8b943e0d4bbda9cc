use crate::geometry::{barycentric_gradients, tet_point, LINE_GAUSS3, TET_DEG2, TET_DEG3, TRI_DEG4};
use crate::whitney::assembly::{local_ned, local_rt};
use crate::whitney::{DofVector, FormDegree};
use crate::{Error, Mesh, Result, Vec3};

/// Analytic field handed to interpolation and error routines.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Scalar(&'a dyn Fn(&Vec3) -> f64),
    Vector(&'a dyn Fn(&Vec3) -> Vec3),
}

/// Canonical degrees of freedom: vertex values, edge circulations, face
/// fluxes, cell averages.
pub fn interpolate(mesh: &Mesh, degree: FormDegree, field: Field<'_>) -> Result<DofVector> {
    match (degree, field) {
        (FormDegree::P1 | FormDegree::P0, Field::Scalar(f)) => Ok(interpolate_scalar(mesh, degree, f)),
        (FormDegree::Ned | FormDegree::Rt, Field::Vector(f)) => Ok(interpolate_vector(mesh, degree, f)),
        _ => Err(Error::Degenerate(format!("field kind does not match the {} space", degree.name()))),
    }
}

pub fn interpolate_scalar(mesh: &Mesh, degree: FormDegree, f: &dyn Fn(&Vec3) -> f64) -> DofVector {
    let values = match degree {
        FormDegree::P1 => mesh.vertices().iter().map(f).collect(),
        FormDegree::P0 => (0..mesh.num_tets())
            .map(|t| {
                let p = mesh.tet_points(t);
                TET_DEG3.points.iter().zip(TET_DEG3.weights).map(|(b, w)| w * f(&tet_point(&p, b))).sum()
            })
            .collect(),
        _ => panic!("scalar interpolation into {}", degree.name()),
    };
    DofVector::new(degree, values)
}

pub fn interpolate_vector(mesh: &Mesh, degree: FormDegree, f: &dyn Fn(&Vec3) -> Vec3) -> DofVector {
    let x = mesh.vertices();
    let values = match degree {
        FormDegree::Ned => mesh
            .edges()
            .iter()
            .map(|&[a, b]| {
                let d = x[b] - x[a];
                LINE_GAUSS3.points.iter().zip(LINE_GAUSS3.weights).map(|(s, w)| w * f(&(x[a] + d * s[0])).dot(&d)).sum()
            })
            .collect(),
        FormDegree::Rt => (0..mesh.num_faces())
            .map(|fi| {
                let [a, b, c] = mesh.faces()[fi];
                let n = mesh.face_area_vector(fi);
                TRI_DEG4.points.iter().zip(TRI_DEG4.weights).map(|(l, w)| w * f(&(x[a] * l[0] + x[b] * l[1] + x[c] * l[2])).dot(&n)).sum()
            })
            .collect(),
        _ => panic!("vector interpolation into {}", degree.name()),
    };
    DofVector::new(degree, values)
}

/// Face fluxes of a cellwise-defined vector field `field(t, lam, x)`,
/// averaged over the two cells of interior faces.
pub fn face_fluxes_from_cells(mesh: &Mesh, field: impl Fn(usize, &[f64; 4], &Vec3) -> Vec3) -> Vec<f64> {
    let mut flux = vec![0.0; mesh.num_faces()];
    for t in 0..mesh.num_tets() {
        let p = mesh.tet_points(t);
        for (k, lf) in crate::mesh::LOCAL_FACES.iter().enumerate() {
            let f = mesh.tet_faces(t)[k];
            let n = mesh.face_area_vector(f);
            let share = if mesh.is_boundary_face(f) { 1.0 } else { 0.5 };
            let mut s = 0.0;
            for (l, w) in TRI_DEG4.points.iter().zip(TRI_DEG4.weights) {
                let mut lam = [0.0; 4];
                for (i, &li) in lf.iter().enumerate() {
                    lam[li] = l[i];
                }
                s += w * field(t, &lam, &tet_point(&p, &lam)).dot(&n);
            }
            flux[f] += share * s;
        }
    }
    flux
}

/// Value of a scalar form (P1, P0) in cell `t` at barycentric point `lam`.
pub fn scalar_at(mesh: &Mesh, v: &DofVector, t: usize, lam: &[f64; 4]) -> f64 {
    match v.degree {
        FormDegree::P1 => mesh.tets()[t].iter().zip(lam).map(|(&i, l)| v.values[i] * l).sum(),
        FormDegree::P0 => v.values[t],
        _ => panic!("scalar_at on a vector form"),
    }
}

/// Value of a vector form (NED, RT) in cell `t` at barycentric point `lam`.
pub fn vector_at(mesh: &Mesh, v: &DofVector, t: usize, lam: &[f64; 4]) -> Vec3 {
    let p = mesh.tet_points(t);
    match v.degree {
        FormDegree::Ned => {
            let g = barycentric_gradients(&p);
            let phi = local_ned(mesh, t, &g, lam);
            mesh.tet_edges(t).iter().zip(&phi).map(|(&e, w)| w * v.values[e]).sum()
        }
        FormDegree::Rt => {
            let phi = local_rt(mesh, t, &p, &tet_point(&p, lam));
            mesh.tet_faces(t).iter().zip(&phi).map(|(&f, w)| w * v.values[f]).sum()
        }
        _ => panic!("vector_at on a scalar form"),
    }
}

/// (‖v − exact‖_L², ‖exact‖_L²) by degree-2 quadrature.
pub fn l2_error(mesh: &Mesh, v: &DofVector, exact: Field<'_>) -> (f64, f64) {
    let (mut e2, mut n2) = (0.0, 0.0);
    for t in 0..mesh.num_tets() {
        let p = mesh.tet_points(t);
        for (b, w) in TET_DEG2.points.iter().zip(TET_DEG2.weights) {
            let x = tet_point(&p, b);
            let wv = w * mesh.volume(t);
            match exact {
                Field::Scalar(f) => {
                    let ex = f(&x);
                    e2 += wv * (scalar_at(mesh, v, t, b) - ex).powi(2);
                    n2 += wv * ex * ex;
                }
                Field::Vector(f) => {
                    let ex = f(&x);
                    e2 += wv * (vector_at(mesh, v, t, b) - ex).norm_squared();
                    n2 += wv * ex.norm_squared();
                }
            }
        }
    }
    (e2.sqrt(), n2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_primitive, Primitive};
    use crate::whitney::{incidence, Incidence};

    #[test]
    fn constant_into_p1() {
        let m = generate_primitive(&Primitive::Cube { n: 2 }).unwrap();
        let v = interpolate_scalar(&m, FormDegree::P1, &|_| 1.0);
        assert!(v.values.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn gradient_commutes_for_linear_field() {
        let m = generate_primitive(&Primitive::Cube { n: 2 }).unwrap();
        let ned = interpolate_vector(&m, FormDegree::Ned, &|_| Vec3::x());
        let p1 = interpolate_scalar(&m, FormDegree::P1, &|x| x.x);
        let g = incidence(&m, Incidence::Grad).mul_vec(&p1.values);
        for (a, b) in ned.values.iter().zip(&g) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn curl_commutes_for_quadratic_potential() {
        // curl(0, 0, xy) = (x, −y, 0)
        let m = generate_primitive(&Primitive::Cube { n: 2 }).unwrap();
        let ned = interpolate_vector(&m, FormDegree::Ned, &|x| Vec3::new(0.0, 0.0, x.x * x.y));
        let rt = interpolate_vector(&m, FormDegree::Rt, &|x| Vec3::new(x.x, -x.y, 0.0));
        let c = incidence(&m, Incidence::Curl).mul_vec(&ned.values);
        for (a, b) in rt.values.iter().zip(&c) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_converges_first_order() {
        let f = |x: &Vec3| Vec3::new((2.0 * x.y).sin(), x.x * x.z, (x.x + x.y).cos());
        for deg in [FormDegree::Ned, FormDegree::Rt] {
            let errs: Vec<f64> = [2, 4, 8]
                .iter()
                .map(|&n| {
                    let m = generate_primitive(&Primitive::Cube { n }).unwrap();
                    l2_error(&m, &interpolate_vector(&m, deg, &f), Field::Vector(&f)).0
                })
                .collect();
            assert!(errs[0] / errs[1] >= 1.8 && errs[1] / errs[2] >= 1.8, "{deg:?}: {errs:?}");
        }
    }
}
