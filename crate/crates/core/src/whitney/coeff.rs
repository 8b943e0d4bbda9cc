use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::geometry::{tet_point, TET_DEG2, TET_DEG3};
use crate::{Error, Mat3, Mesh, Result, Vec3};

/// Which power of the coefficient weights an inner product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Identity,
    Direct,
    Inverse,
}

type Callback = Arc<dyn Fn(&Vec3) -> Mat3 + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Identity,
    Constant(Mat3),
    PerCell(Vec<Mat3>),
    Analytic { f: Callback, per_cell: bool },
}

/// Symmetric positive-definite 3×3 matrix field (σ or ε).
#[derive(Clone)]
pub struct CoefficientField {
    rule: Rule,
    name: String,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField").field("name", &self.name).finish()
    }
}

fn check_spd(a: &Mat3, where_: &str) -> Result<(f64, f64)> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if (a - a.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Coefficient(format!("not symmetric at {where_}")));
    }
    let ev = SymmetricEigen::new(0.5 * (a + a.transpose())).eigenvalues;
    let (lo, hi) = (ev.min(), ev.max());
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::Coefficient(format!("not positive definite at {where_} (smallest eigenvalue {lo:e})")));
    }
    Ok((lo, hi))
}

fn sym_inverse(a: &Mat3) -> Mat3 {
    let inv = a.try_inverse().expect("coefficient is singular");
    0.5 * (inv + inv.transpose())
}

impl CoefficientField {
    pub fn identity() -> Self {
        CoefficientField { rule: Rule::Identity, name: "identity".into() }
    }

    pub fn constant(a: Mat3) -> Result<Self> {
        check_spd(&a, "constant value")?;
        Ok(CoefficientField { rule: Rule::Constant(a), name: "constant".into() })
    }

    pub fn diagonal(a: f64, b: f64, c: f64) -> Result<Self> {
        let mut f = Self::constant(Mat3::from_diagonal(&Vec3::new(a, b, c)))?;
        f.name = "diagonal".into();
        Ok(f)
    }

    pub fn per_cell(values: Vec<Mat3>) -> Result<Self> {
        for (t, a) in values.iter().enumerate() {
            check_spd(a, &format!("cell {t}"))?;
        }
        Ok(CoefficientField { rule: Rule::PerCell(values), name: "per-cell".into() })
    }

    /// Analytic field; with `per_cell` it is sampled once at each centroid.
    pub fn analytic(name: &str, per_cell: bool, f: impl Fn(&Vec3) -> Mat3 + Send + Sync + 'static) -> Self {
        CoefficientField { rule: Rule::Analytic { f: Arc::new(f), per_cell }, name: name.into() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.rule, Rule::Identity)
    }

    /// Value in cell `t` at point `x`.
    pub fn eval(&self, mesh: &Mesh, t: usize, x: &Vec3) -> Mat3 {
        match &self.rule {
            Rule::Identity => Mat3::identity(),
            Rule::Constant(a) => *a,
            Rule::PerCell(v) => v[t],
            Rule::Analytic { f, per_cell: true } => f(&mesh.centroid(t)),
            Rule::Analytic { f, per_cell: false } => f(x),
        }
    }

    pub fn eval_weighted(&self, mesh: &Mesh, t: usize, x: &Vec3, w: Weight) -> Mat3 {
        match w {
            Weight::Identity => Mat3::identity(),
            Weight::Direct => self.eval(mesh, t, x),
            Weight::Inverse => sym_inverse(&self.eval(mesh, t, x)),
        }
    }

    /// Whether the value is constant on every cell.
    pub fn cellwise_constant(&self) -> bool {
        !matches!(self.rule, Rule::Analytic { per_cell: false, .. })
    }

    /// Ellipticity bounds (m, M) over all quadrature points of the mesh;
    /// fails on asymmetry or loss of definiteness.
    pub fn bounds(&self, mesh: &Mesh) -> Result<(f64, f64)> {
        match &self.rule {
            Rule::Identity => return Ok((1.0, 1.0)),
            Rule::Constant(a) => return check_spd(a, "constant value"),
            Rule::PerCell(v) if v.len() != mesh.num_tets() => {
                return Err(Error::Dimension { expected: mesh.num_tets(), got: v.len() });
            }
            _ => {}
        }
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for t in 0..mesh.num_tets() {
            let p = mesh.tet_points(t);
            let pts = TET_DEG2.points.iter().chain(TET_DEG3.points.iter());
            for (q, b) in pts.enumerate() {
                if q > 0 && self.cellwise_constant() {
                    break;
                }
                let (l, h) = check_spd(&self.eval(mesh, t, &tet_point(&p, b)), &format!("cell {t}"))?;
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(CoefficientField::diagonal(1.0, -1.0, 1.0).is_err());
        let mut a = Mat3::identity();
        a[(0, 1)] = 0.5;
        assert!(CoefficientField::constant(a).is_err());
    }

    #[test]
    fn inverse_is_symmetric() {
        let a = Mat3::new(2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0);
        let inv = sym_inverse(&a);
        assert!((inv - inv.transpose()).amax() == 0.0);
        assert!((inv * a - Mat3::identity()).amax() < 1e-14);
    }
}
