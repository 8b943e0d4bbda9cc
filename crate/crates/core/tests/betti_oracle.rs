//! Betti numbers from ranks of the incidence matrices over GF(p), checked
//! against the counts the mesh reports (components and cuts).

use divcurl::mesh::{betti_counts, generate_primitive};
use divcurl::whitney::{incidence, Incidence};
use divcurl::{Primitive, SparseMatrix};

const P: u64 = 1_000_003;

fn inv(a: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u64, a % P, P - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

fn rank_mod_p(m: &SparseMatrix) -> usize {
    let cols = m.cols();
    let mut a = vec![vec![0u64; cols]; m.rows()];
    for (r, c, v) in m.triplets() {
        let v = v.round() as i64;
        assert_eq!(v as f64, m.get(r, c), "incidence entries are integers");
        a[r][c] = (a[r][c] + v.rem_euclid(P as i64) as u64) % P;
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let s = inv(a[rank][c]);
        let pivot: Vec<u64> = a[rank].iter().map(|x| x * s % P).collect();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot).skip(c) {
                    *x = (*x + P - f * y % P) % P;
                }
            }
        }
        a[rank] = pivot;
        rank += 1;
    }
    rank
}

/// (b0, b1, b2, b3) of the tet complex.
fn betti(prim: &Primitive) -> ([usize; 4], (usize, usize)) {
    let mesh = generate_primitive(prim).unwrap();
    let g = rank_mod_p(&incidence(&mesh, Incidence::Grad));
    let c = rank_mod_p(&incidence(&mesh, Incidence::Curl));
    let d = rank_mod_p(&incidence(&mesh, Incidence::Div));
    let b = [mesh.num_vertices() - g, mesh.num_edges() - g - c, mesh.num_faces() - c - d, mesh.num_tets() - d];
    (b, betti_counts(&mesh).unwrap())
}

#[test]
fn cube_is_contractible() {
    let (b, (n1, n2)) = betti(&Primitive::Cube { n: 3 });
    assert_eq!(b, [1, 0, 0, 0]);
    assert_eq!((n1, n2), (0, 0));
}

#[test]
fn shell_has_one_cavity() {
    let (b, (n1, n2)) = betti(&Primitive::SphericalShell { r_in: 1.0, r_out: 2.0, refinement: 1 });
    assert_eq!(b, [1, 0, 1, 0]);
    assert_eq!((n1, n2), (b[2], b[1]));
}

#[test]
fn torus_has_one_handle() {
    let (b, (n1, n2)) = betti(&Primitive::SolidTorus { major: 2.0, minor: 0.5, refinement: 1, with_cut: true });
    assert_eq!(b, [1, 1, 0, 0]);
    assert_eq!((n1, n2), (b[2], b[1]));
}

#[test]
fn uncut_torus_is_a_cohomology_mismatch() {
    let mesh = generate_primitive(&Primitive::SolidTorus { major: 2.0, minor: 0.5, refinement: 1, with_cut: false }).unwrap();
    assert!(matches!(betti_counts(&mesh), Err(divcurl::Error::Cohomology { cuts: 0, betti1: 1 })));
}
