//! Simplex geometry and quadrature rules.

use crate::Vec3;

/// Quadrature rule on a reference simplex, in barycentric coordinates.
/// Weights sum to one; multiply by the simplex measure.
pub struct Rule<const N: usize> {
    pub points: &'static [[f64; N]],
    pub weights: &'static [f64],
}

const TA: f64 = 0.585_410_196_624_968_5;
const TB: f64 = 0.138_196_601_125_010_5;

/// 4-point rule on tetrahedra, exact for degree 2.
pub const TET_DEG2: Rule<4> = Rule { points: &[[TA, TB, TB, TB], [TB, TA, TB, TB], [TB, TB, TA, TB], [TB, TB, TB, TA]], weights: &[0.25, 0.25, 0.25, 0.25] };

/// 5-point rule on tetrahedra, exact for degree 3 (one negative weight).
pub const TET_DEG3: Rule<4> = Rule {
    points: &[
        [0.25, 0.25, 0.25, 0.25],
        [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 0.5, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 0.5, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5],
    ],
    weights: &[-0.8, 0.45, 0.45, 0.45, 0.45],
};

const D1A: f64 = 0.445_948_490_915_965;
const D1B: f64 = 0.108_103_018_168_070;
const D2A: f64 = 0.091_576_213_509_771;
const D2B: f64 = 0.816_847_572_980_459;
const D1W: f64 = 0.223_381_589_678_011;
const D2W: f64 = 0.109_951_743_655_322;

/// 6-point rule on triangles, exact for degree 4.
pub const TRI_DEG4: Rule<3> =
    Rule { points: &[[D1A, D1A, D1B], [D1A, D1B, D1A], [D1B, D1A, D1A], [D2A, D2A, D2B], [D2A, D2B, D2A], [D2B, D2A, D2A]], weights: &[D1W, D1W, D1W, D2W, D2W, D2W] };

/// 3-point Gauss-Legendre on [0, 1], exact for degree 5.
pub const LINE_GAUSS3: Rule<1> = Rule { points: &[[0.112_701_665_379_258_3], [0.5], [0.887_298_334_620_741_7]], weights: &[5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0] };

pub fn signed_volume(p: &[Vec3; 4]) -> f64 {
    (p[1] - p[0]).dot(&(p[2] - p[0]).cross(&(p[3] - p[0]))) / 6.0
}

/// Gradients of the four barycentric coordinates of a tetrahedron.
pub fn barycentric_gradients(p: &[Vec3; 4]) -> [Vec3; 4] {
    let vol6 = 6.0 * signed_volume(p);
    let g1 = (p[2] - p[0]).cross(&(p[3] - p[0])) / vol6;
    let g2 = (p[3] - p[0]).cross(&(p[1] - p[0])) / vol6;
    let g3 = (p[1] - p[0]).cross(&(p[2] - p[0])) / vol6;
    [-(g1 + g2 + g3), g1, g2, g3]
}

pub fn tet_point(p: &[Vec3; 4], bary: &[f64; 4]) -> Vec3 {
    p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2] + p[3] * bary[3]
}

/// Oriented area vector `½ (b-a)×(c-a)`.
pub fn area_vector(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    0.5 * (b - a).cross(&(c - a))
}

/// Solid angle subtended at `origin` by the oriented triangle (a, b, c),
/// positive when the orientation normal points away from `origin`.
pub fn solid_angle(origin: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (r1, r2, r3) = (a - origin, b - origin, c - origin);
    let (l1, l2, l3) = (r1.norm(), r2.norm(), r3.norm());
    let num = r1.dot(&r2.cross(&r3));
    let den = l1 * l2 * l3 + r1.dot(&r2) * l3 + r1.dot(&r3) * l2 + r2.dot(&r3) * l1;
    2.0 * num.atan2(den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_tet(a: i32, b: i32, c: i32) -> f64 {
        // ∫ x^a y^b z^c over the unit reference tet = a! b! c! / (a+b+c+3)!
        let f = |n: i32| (1..=n).map(|k| k as f64).product::<f64>();
        f(a) * f(b) * f(c) / f(a + b + c + 3)
    }

    #[test]
    fn tet_rules_are_exact_to_their_degree() {
        let p = [Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()];
        for (rule, deg) in [(&TET_DEG2, 2), (&TET_DEG3, 3)] {
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        let q: f64 = rule
                            .points
                            .iter()
                            .zip(rule.weights)
                            .map(|(bc, w)| {
                                let x = tet_point(&p, bc);
                                w * x.x.powi(a) * x.y.powi(b) * x.z.powi(c)
                            })
                            .sum::<f64>()
                            / 6.0;
                        assert!((q - monomial_tet(a, b, c)).abs() < 1e-14, "{a}{b}{c}");
                    }
                }
            }
        }
    }

    #[test]
    fn triangle_rule_integrates_quartics() {
        // ∫ x^a y^b over the unit triangle = a! b! / (a+b+2)!
        let f = |n: i32| (1..=n).map(|k| k as f64).product::<f64>();
        for a in 0..=4 {
            for b in 0..=(4 - a) {
                let q: f64 = TRI_DEG4.points.iter().zip(TRI_DEG4.weights).map(|(bc, w)| w * bc[1].powi(a) * bc[2].powi(b)).sum::<f64>() * 0.5;
                assert!((q - f(a) * f(b) / f(a + b + 2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solid_angles_of_closed_surface() {
        let p = [Vec3::new(-1.0, -1.0, -1.0), Vec3::new(3.0, -1.0, -1.0), Vec3::new(-1.0, 3.0, -1.0), Vec3::new(-1.0, -1.0, 3.0)];
        // outward-oriented faces of the tet
        let faces = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)];
        let total: f64 = faces.iter().map(|&(a, b, c)| solid_angle(&Vec3::zeros(), &p[a], &p[b], &p[c])).sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let outside = Vec3::new(10.0, 10.0, 10.0);
        let total: f64 = faces.iter().map(|&(a, b, c)| solid_angle(&outside, &p[a], &p[b], &p[c])).sum();
        assert!(total.abs() < 1e-12);
    }
}
