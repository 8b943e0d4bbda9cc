use std::f64::consts::PI;

use crate::geometry::signed_volume;
use crate::{Error, Mesh, Result, Vec3};

/// Built-in mesh primitives.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    /// Unit cube split into n³ subcubes of 6 tets each.
    Cube { n: usize },
    /// r_in ≤ |x| ≤ r_out; a cube lattice of 56·k³ subcubes mapped radially.
    SphericalShell { r_in: f64, r_out: f64, refinement: usize },
    /// Torus of major radius R and minor radius r about the z axis; the cross
    /// section has 2k cells across. With `with_cut` the meridian disk at
    /// azimuth 0 is tagged as Σ_1 with normal +e_φ.
    SolidTorus { major: f64, minor: f64, refinement: usize, with_cut: bool },
}

pub fn generate_primitive(spec: &Primitive) -> Result<Mesh> {
    match *spec {
        Primitive::Cube { n } => cube(n),
        Primitive::SphericalShell { r_in, r_out, refinement } => shell(r_in, r_out, refinement),
        Primitive::SolidTorus { major, minor, refinement, with_cut } => torus(major, minor, refinement, with_cut),
    }
}

/// Kuhn split of the hexahedron with corner index `c` and lattice `idx`.
fn kuhn(idx: impl Fn(usize, usize, usize) -> usize, c: [usize; 3], out: &mut Vec<[usize; 4]>) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in PERMS {
        let mut cur = c;
        let mut tet = [idx(cur[0], cur[1], cur[2]); 4];
        for (k, &axis) in p.iter().enumerate() {
            cur[axis] += 1;
            tet[k + 1] = idx(cur[0], cur[1], cur[2]);
        }
        out.push(tet);
    }
}

fn orient(vertices: &[Vec3], tets: &mut [[usize; 4]]) {
    for t in tets.iter_mut() {
        if signed_volume(&t.map(|v| vertices[v])) < 0.0 {
            t.swap(2, 3);
        }
    }
}

fn cube(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Degenerate("cube needs at least one subdivision".into()));
    }
    let m = n + 1;
    let idx = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                vertices.push(Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                kuhn(idx, [i, j, k], &mut tets);
            }
        }
    }
    orient(&vertices, &mut tets);
    Mesh::new(vertices, tets)
}

fn shell(r_in: f64, r_out: f64, k: usize) -> Result<Mesh> {
    if !(r_in > 0.0 && r_in < r_out) || !r_out.is_finite() {
        return Err(Error::Degenerate(format!("shell radii need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    if k == 0 {
        return Err(Error::Degenerate("shell refinement must be at least 1".into()));
    }
    let k = k as i64;
    let side = (4 * k + 1) as usize;
    let pos = |i: i64| (i + 2 * k) as usize;
    let inside = |c: [i64; 3]| c.iter().all(|&x| x >= -k && x + 1 <= k);
    let mut id = vec![usize::MAX; side * side * side];
    let mut vertices = Vec::new();
    let mut tets = Vec::new();
    for z in -2 * k..2 * k {
        for y in -2 * k..2 * k {
            for x in -2 * k..2 * k {
                if inside([x, y, z]) {
                    continue;
                }
                let mut local = Vec::with_capacity(6);
                kuhn(|i, j, l| i + side * (j + side * l), [pos(x), pos(y), pos(z)], &mut local);
                for tet in local {
                    let mut mapped = [0; 4];
                    for (slot, &lin) in mapped.iter_mut().zip(&tet) {
                        if id[lin] == usize::MAX {
                            let (i, j, l) = (lin % side, (lin / side) % side, lin / (side * side));
                            let p = Vec3::new(i as f64, j as f64, l as f64) - Vec3::repeat(2.0 * k as f64);
                            let s = p.amax() / k as f64;
                            let r = r_in + (s - 1.0) * (r_out - r_in);
                            id[lin] = vertices.len();
                            vertices.push(p.normalize() * r);
                        }
                        *slot = id[lin];
                    }
                    tets.push(mapped);
                }
            }
        }
    }
    orient(&vertices, &mut tets);
    Mesh::new(vertices, tets)
}

/// Prism (bottom a,b,c; top a',b',c') into 3 tets, diagonals through the
/// smallest vertex id of each quad so neighbours agree.
fn split_prism(v: [usize; 6], out: &mut Vec<[usize; 4]>) {
    let i = (0..6).min_by_key(|&i| v[i]).unwrap();
    let (b, t) = if i < 3 { (0, 3) } else { (3, 0) };
    let j = i % 3;
    let w = [v[b + j], v[b + (j + 1) % 3], v[b + (j + 2) % 3], v[t + j], v[t + (j + 1) % 3], v[t + (j + 2) % 3]];
    if w[1].min(w[5]) < w[2].min(w[4]) {
        out.extend([[w[0], w[1], w[2], w[5]], [w[0], w[1], w[5], w[4]], [w[0], w[4], w[5], w[3]]]);
    } else {
        out.extend([[w[0], w[1], w[2], w[4]], [w[0], w[4], w[2], w[5]], [w[0], w[4], w[5], w[3]]]);
    }
}

fn torus(big_r: f64, r: f64, k: usize, with_cut: bool) -> Result<Mesh> {
    if !(r > 0.0 && r < big_r) || !big_r.is_finite() {
        return Err(Error::Degenerate(format!("torus radii need 0 < r < R, got R={big_r}, r={r}")));
    }
    if k == 0 {
        return Err(Error::Degenerate("torus refinement must be at least 1".into()));
    }
    let n = 2 * k;
    let segs = ((2.0 * PI * big_r * n as f64 / (2.0 * r)).ceil() as usize).max(3);

    // disk: square grid squeezed onto the unit disk
    let mut disk = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let y = -1.0 + 2.0 * j as f64 / n as f64;
            disk.push((x * (1.0 - 0.5 * y * y).sqrt(), y * (1.0 - 0.5 * x * x).sqrt()));
        }
    }
    let dv = |i: usize, j: usize| i + (n + 1) * j;
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (dv(i, j), dv(i + 1, j), dv(i + 1, j + 1), dv(i, j + 1));
            // alternate diagonals by quadrant so the split is symmetric about the centre
            if (i < n / 2) == (j < n / 2) {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }

    let nd = disk.len();
    let mut vertices = Vec::with_capacity(nd * segs);
    for s in 0..segs {
        let phi = 2.0 * PI * s as f64 / segs as f64;
        for &(x, y) in &disk {
            let rho = big_r + r * x;
            vertices.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), r * y));
        }
    }
    let mut tets = Vec::with_capacity(3 * tris.len() * segs);
    for s in 0..segs {
        let (lo, hi) = (s * nd, ((s + 1) % segs) * nd);
        for t in &tris {
            split_prism([lo + t[0], lo + t[1], lo + t[2], hi + t[0], hi + t[1], hi + t[2]], &mut tets);
        }
    }
    orient(&vertices, &mut tets);
    let mesh = Mesh::new(vertices, tets)?;
    if !with_cut {
        return Ok(mesh);
    }
    // Disk triangles in the (x, y) plane map to the meridian half plane with
    // x → +e_ρ, y → +e_z; e_ρ × e_z = −e_φ, so reverse them for n = +e_φ.
    let cut: Vec<[usize; 3]> = tris.iter().map(|t| [t[0], t[2], t[1]]).collect();
    mesh.with_cuts(&[cut])
}
