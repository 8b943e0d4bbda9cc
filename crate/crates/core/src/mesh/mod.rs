//! Tetrahedral meshes with derived topology, boundary components and cut surfaces.

mod generate;
mod msh;
mod quality;
mod topology;

use std::collections::HashMap;

use crate::geometry::{area_vector, signed_volume};
use crate::{Error, Result, Vec3};

pub use generate::{generate_primitive, Primitive};
pub use msh::{load_msh, parse_msh, write_msh};
pub use quality::{mesh_quality, MeshQualityReport};
pub use topology::{betti_counts, euler_characteristic};

pub const NONE: usize = usize::MAX;

/// Local vertex pairs of the six tet edges.
pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
/// Local vertices of the face opposite local vertex `i`.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// A tagged cut surface Σ_j with its chosen normal side.
#[derive(Clone, Debug, PartialEq)]
pub struct CutSurface {
    /// 1-based cut index.
    pub id: usize,
    pub faces: Vec<usize>,
    /// +1 where n_j agrees with the face's orientation normal, −1 otherwise.
    pub signs: Vec<f64>,
    /// Tet on the side of each face that n_j points into.
    pub plus_tets: Vec<usize>,
    /// ∂Σ_j as (edge id, tangent sign relative to the edge orientation), chained into loops.
    pub boundary_curve: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    tet_edges: Vec<[usize; 6]>,
    tet_faces: Vec<[usize; 4]>,
    tet_face_signs: Vec<[f64; 4]>,
    face_tets: Vec<[usize; 2]>,
    volumes: Vec<f64>,
    boundary_faces: Vec<usize>,
    /// Index into `boundary_faces`, or NONE.
    face_boundary_slot: Vec<usize>,
    /// +1 when the boundary face's orientation normal points out of Ω.
    outward: Vec<f64>,
    components: Vec<Vec<usize>>,
    face_component: Vec<usize>,
    vertex_component: Vec<usize>,
    boundary_edges: Vec<usize>,
    edge_boundary_slot: Vec<usize>,
    edge_on_boundary: Vec<bool>,
    cuts: Vec<CutSurface>,
    edge_map: HashMap<[usize; 2], usize>,
    face_map: HashMap<[usize; 3], usize>,
}

fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

/// Parity of the permutation taking `f` to ascending order (+1 even, −1 odd).
fn parity3(f: [usize; 3]) -> f64 {
    let inv = (f[0] > f[1]) as u8 + (f[0] > f[2]) as u8 + (f[1] > f[2]) as u8;
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Mesh {
    /// Build a mesh from raw vertices and tets; boundary components are the
    /// edge-connected pieces of ∂Ω, with Γ_0 the one with the largest bounding box.
    pub fn new(vertices: Vec<Vec3>, tets: Vec<[usize; 4]>) -> Result<Mesh> {
        let mut m = Self::build(vertices, tets)?;
        let comps = m.connected_boundary_pieces();
        let gamma0 = (0..comps.len())
            .max_by(|&a, &b| m.bbox_diag(&comps[a]).total_cmp(&m.bbox_diag(&comps[b])).then(b.cmp(&a)))
            .ok_or_else(|| Error::Topology("mesh has no boundary".into()))?;
        let mut ordered = vec![comps[gamma0].clone()];
        ordered.extend(comps.iter().enumerate().filter(|(i, _)| *i != gamma0).map(|(_, c)| c.clone()));
        m.set_components(ordered)?;
        Ok(m)
    }

    /// Build a mesh whose boundary components are given by tags: `tagged[i]`
    /// lists the boundary triangles of Γ_i (vertex triples).
    pub fn with_components(vertices: Vec<Vec3>, tets: Vec<[usize; 4]>, tagged: &[Vec<[usize; 3]>]) -> Result<Mesh> {
        let mut m = Self::build(vertices, tets)?;
        if tagged.first().map_or(true, |g| g.is_empty()) {
            return Err(Error::Tag("missing gamma0".into()));
        }
        let mut seen = vec![false; m.faces.len()];
        let mut comps = Vec::with_capacity(tagged.len());
        for (i, tris) in tagged.iter().enumerate() {
            let mut ids = Vec::with_capacity(tris.len());
            for t in tris {
                let f = m.face_id(*t).ok_or_else(|| Error::Tag(format!("gamma{i} triangle {t:?} is not a mesh face")))?;
                if m.face_boundary_slot[f] == NONE {
                    return Err(Error::Tag(format!("gamma{i} triangle {t:?} is not on the boundary")));
                }
                if std::mem::replace(&mut seen[f], true) {
                    return Err(Error::Tag(format!("boundary face {t:?} tagged twice")));
                }
                ids.push(f);
            }
            ids.sort_unstable();
            comps.push(ids);
        }
        if let Some(&f) = m.boundary_faces.iter().find(|&&f| !seen[f]) {
            return Err(Error::Tag(format!("boundary face {:?} carries no gamma tag", m.faces[f])));
        }
        let widest = (0..comps.len()).max_by(|&a, &b| m.bbox_diag(&comps[a]).total_cmp(&m.bbox_diag(&comps[b]))).unwrap();
        if m.bbox_diag(&comps[widest]) > m.bbox_diag(&comps[0]) * (1.0 + 1e-9) {
            return Err(Error::Tag(format!("gamma0 is not the outermost boundary component (gamma{widest} is wider)")));
        }
        m.set_components(comps)?;
        Ok(m)
    }

    fn build(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Mesh> {
        if tets.is_empty() {
            return Err(Error::Topology("mesh has no cells".into()));
        }
        let nv = vertices.len();
        let mut volumes = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter_mut().enumerate() {
            if let Some(&v) = tet.iter().find(|&&v| v >= nv) {
                return Err(Error::BadId { index: v, count: nv });
            }
            let p = tet.map(|v| vertices[v]);
            let mut vol = signed_volume(&p);
            let scale = (p[1] - p[0]).norm().max((p[2] - p[0]).norm()).max((p[3] - p[0]).norm());
            if vol.abs() <= 1e-14 * scale.powi(3) {
                return Err(Error::Topology(format!("cell {t} is degenerate")));
            }
            if vol < 0.0 {
                tet.swap(2, 3);
                vol = -vol;
            }
            volumes.push(vol);
        }

        let mut edge_map = HashMap::new();
        let mut edges = Vec::new();
        let mut face_map = HashMap::new();
        let mut faces = Vec::new();
        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut face_tets: Vec<[usize; 2]> = Vec::new();
        for (t, tet) in tets.iter().enumerate() {
            let mut te = [0; 6];
            for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
                let key = [tet[i].min(tet[j]), tet[i].max(tet[j])];
                te[k] = *edge_map.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
            let mut tf = [0; 4];
            for (k, lf) in LOCAL_FACES.iter().enumerate() {
                let key = sorted3(lf.map(|i| tet[i]));
                let id = *face_map.entry(key).or_insert_with(|| {
                    faces.push(key);
                    face_tets.push([NONE, NONE]);
                    faces.len() - 1
                });
                let slot = &mut face_tets[id];
                if slot[0] == NONE {
                    slot[0] = t;
                } else if slot[1] == NONE {
                    slot[1] = t;
                } else {
                    return Err(Error::Topology(format!("face {key:?} is shared by more than two cells")));
                }
                tf[k] = id;
            }
            tet_edges.push(te);
            tet_faces.push(tf);
        }

        let mut tet_face_signs = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            let p = tet.map(|v| vertices[v]);
            let c = (p[0] + p[1] + p[2] + p[3]) / 4.0;
            let mut s = [0.0; 4];
            for k in 0..4 {
                let [a, b, cc] = faces[tet_faces[t][k]];
                let n = area_vector(&vertices[a], &vertices[b], &vertices[cc]);
                s[k] = if n.dot(&(vertices[a] - c)) > 0.0 { 1.0 } else { -1.0 };
            }
            tet_face_signs.push(s);
        }

        let mut boundary_faces = Vec::new();
        let mut face_boundary_slot = vec![NONE; faces.len()];
        let mut outward = Vec::new();
        for (f, ft) in face_tets.iter().enumerate() {
            if ft[1] == NONE {
                face_boundary_slot[f] = boundary_faces.len();
                boundary_faces.push(f);
                let t = ft[0];
                let k = tet_faces[t].iter().position(|&g| g == f).unwrap();
                outward.push(tet_face_signs[t][k]);
            }
        }
        let mut edge_on_boundary = vec![false; edges.len()];
        for &f in &boundary_faces {
            let [a, b, c] = faces[f];
            for key in [[a, b], [a, c], [b, c]] {
                edge_on_boundary[edge_map[&key]] = true;
            }
        }
        let boundary_edges: Vec<usize> = (0..edges.len()).filter(|&e| edge_on_boundary[e]).collect();
        let mut edge_boundary_slot = vec![NONE; edges.len()];
        boundary_edges.iter().enumerate().for_each(|(i, &e)| edge_boundary_slot[e] = i);

        let m = Mesh {
            vertices,
            tets,
            edges,
            faces,
            tet_edges,
            tet_faces,
            tet_face_signs,
            face_tets,
            volumes,
            boundary_faces,
            face_boundary_slot,
            outward,
            components: Vec::new(),
            face_component: Vec::new(),
            vertex_component: Vec::new(),
            boundary_edges,
            edge_boundary_slot,
            edge_on_boundary,
            cuts: Vec::new(),
            edge_map,
            face_map,
        };
        if m.cell_components(&[]) != 1 {
            return Err(Error::Topology("mesh cells are not face-connected".into()));
        }
        Ok(m)
    }
}

impl Mesh {
    fn bbox_diag(&self, faces: &[usize]) -> f64 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &f in faces {
            for &v in &self.faces[f] {
                lo = lo.inf(&self.vertices[v]);
                hi = hi.sup(&self.vertices[v]);
            }
        }
        (hi - lo).norm()
    }

    /// Edge-connected pieces of the boundary surface, each sorted, ordered by smallest face id.
    fn connected_boundary_pieces(&self) -> Vec<Vec<usize>> {
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for &f in &self.boundary_faces {
            for e in self.face_edges(f) {
                by_edge.entry(e).or_default().push(f);
            }
        }
        let mut label = vec![NONE; self.faces.len()];
        let mut pieces = Vec::new();
        for &start in &self.boundary_faces {
            if label[start] != NONE {
                continue;
            }
            let id = pieces.len();
            let mut piece = vec![start];
            label[start] = id;
            let mut stack = vec![start];
            while let Some(f) = stack.pop() {
                for e in self.face_edges(f) {
                    for &g in &by_edge[&e] {
                        if label[g] == NONE {
                            label[g] = id;
                            piece.push(g);
                            stack.push(g);
                        }
                    }
                }
            }
            piece.sort_unstable();
            pieces.push(piece);
        }
        pieces
    }

    fn set_components(&mut self, comps: Vec<Vec<usize>>) -> Result<()> {
        let mut face_component = vec![NONE; self.faces.len()];
        let mut vertex_component = vec![NONE; self.vertices.len()];
        for (i, c) in comps.iter().enumerate() {
            for &f in c {
                face_component[f] = i;
                for &v in &self.faces[f] {
                    if vertex_component[v] != NONE && vertex_component[v] != i {
                        return Err(Error::Topology(format!("vertex {v} touches boundary components {} and {i}", vertex_component[v])));
                    }
                    vertex_component[v] = i;
                }
            }
        }
        self.components = comps;
        self.face_component = face_component;
        self.vertex_component = vertex_component;
        Ok(())
    }

    /// Number of face-connected groups of cells when the listed faces are removed.
    pub(crate) fn cell_components(&self, removed: &[usize]) -> usize {
        let mut cut = vec![false; self.faces.len()];
        removed.iter().for_each(|&f| cut[f] = true);
        let mut seen = vec![false; self.tets.len()];
        let mut count = 0;
        for s in 0..self.tets.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(t) = stack.pop() {
                for &f in &self.tet_faces[t] {
                    if cut[f] {
                        continue;
                    }
                    let o = self.other_tet(f, t);
                    if o != NONE && !seen[o] {
                        seen[o] = true;
                        stack.push(o);
                    }
                }
            }
        }
        count
    }

    /// Attach cut surfaces given as oriented triangles; n_j is the right-hand
    /// normal of each supplied vertex triple.
    pub fn with_cuts(mut self, cuts: &[Vec<[usize; 3]>]) -> Result<Mesh> {
        let mut used = vec![false; self.faces.len()];
        let mut built = Vec::with_capacity(cuts.len());
        for (j, tris) in cuts.iter().enumerate() {
            let cut = self.build_cut(j + 1, tris)?;
            for &f in &cut.faces {
                if std::mem::replace(&mut used[f], true) {
                    return Err(Error::Topology(format!("cut sigma{} shares face {:?} with another cut", j + 1, self.faces[f])));
                }
            }
            built.push(cut);
        }
        self.cuts = built;
        Ok(self)
    }

    fn build_cut(&self, id: usize, tris: &[[usize; 3]]) -> Result<CutSurface> {
        let err = |msg: String| Error::Topology(format!("cut sigma{id}: {msg}"));
        if tris.is_empty() {
            return Err(err("no faces".into()));
        }
        let mut faces = Vec::with_capacity(tris.len());
        let mut signs = Vec::with_capacity(tris.len());
        let mut plus_tets = Vec::with_capacity(tris.len());
        let mut net: HashMap<usize, f64> = HashMap::new();
        let mut count: HashMap<usize, usize> = HashMap::new();
        for tri in tris {
            let f = self.face_id(*tri).ok_or_else(|| err(format!("triangle {tri:?} is not a mesh face")))?;
            if self.is_boundary_face(f) {
                return Err(err(format!("face {tri:?} lies on the boundary")));
            }
            let s = parity3(*tri);
            let [t0, t1] = self.face_tets[f];
            // n_j points out of the tet whose outward sign matches s
            let plus = if self.face_sign_in(t0, f) == s { t1 } else { t0 };
            for (e, c) in self.face_edges_signed(f) {
                *net.entry(e).or_default() += s * c;
                *count.entry(e).or_default() += 1;
            }
            faces.push(f);
            signs.push(s);
            plus_tets.push(plus);
        }
        let mut curve = Vec::new();
        let mut keys: Vec<_> = count.keys().copied().collect();
        keys.sort_unstable();
        for e in keys {
            let (c, n) = (count[&e], net[&e]);
            match c {
                1 => {
                    if !self.edge_on_boundary[e] {
                        return Err(err(format!("boundary edge {:?} of the cut is not on the domain boundary", self.edges[e])));
                    }
                    curve.push((e, n));
                }
                2 if n == 0.0 => {}
                2 => return Err(err(format!("inconsistent orientation across edge {:?}", self.edges[e]))),
                _ => return Err(err(format!("edge {:?} is shared by {c} cut faces", self.edges[e]))),
            }
        }
        if !self.faces_edge_connected(&faces) {
            return Err(err("faces are not edge-connected".into()));
        }
        Ok(CutSurface { id, faces, signs, plus_tets, boundary_curve: self.chain_curve(curve) })
    }

    fn faces_edge_connected(&self, faces: &[usize]) -> bool {
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, &f) in faces.iter().enumerate() {
            for e in self.face_edges(f) {
                by_edge.entry(e).or_default().push(k);
            }
        }
        let mut seen = vec![false; faces.len()];
        seen[0] = true;
        let mut stack = vec![0];
        let mut n = 1;
        while let Some(k) = stack.pop() {
            for e in self.face_edges(faces[k]) {
                for &o in &by_edge[&e] {
                    if !seen[o] {
                        seen[o] = true;
                        n += 1;
                        stack.push(o);
                    }
                }
            }
        }
        n == faces.len()
    }

    /// Order boundary-curve edges head to tail.
    fn chain_curve(&self, mut edges: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
        let tail_head = |&(e, s): &(usize, f64)| {
            let [a, b] = self.edges[e];
            if s > 0.0 {
                (a, b)
            } else {
                (b, a)
            }
        };
        let mut out = Vec::with_capacity(edges.len());
        while !edges.is_empty() {
            let first = edges.remove(0);
            let start = tail_head(&first).0;
            let mut head = tail_head(&first).1;
            out.push(first);
            while head != start {
                match edges.iter().position(|x| tail_head(x).0 == head) {
                    Some(k) => {
                        let next = edges.remove(k);
                        head = tail_head(&next).1;
                        out.push(next);
                    }
                    None => break,
                }
            }
        }
        out
    }
}

impl Mesh {
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn volume(&self, t: usize) -> f64 {
        self.volumes[t]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn tet_points(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_edges(&self, t: usize) -> &[usize; 6] {
        &self.tet_edges[t]
    }

    /// Face ids of a tet, indexed by the opposite local vertex.
    pub fn tet_faces(&self, t: usize) -> &[usize; 4] {
        &self.tet_faces[t]
    }

    /// Divergence incidence signs D(t, f) of the tet's local faces.
    pub fn tet_face_signs(&self, t: usize) -> &[f64; 4] {
        &self.tet_face_signs[t]
    }

    pub fn face_sign_in(&self, t: usize, f: usize) -> f64 {
        let k = self.tet_faces[t].iter().position(|&g| g == f).expect("face not in tet");
        self.tet_face_signs[t][k]
    }

    pub fn face_tets(&self, f: usize) -> [usize; 2] {
        self.face_tets[f]
    }

    pub fn other_tet(&self, f: usize, t: usize) -> usize {
        let [a, b] = self.face_tets[f];
        if a == t {
            b
        } else {
            a
        }
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_map.get(&[a.min(b), a.max(b)]).copied()
    }

    pub fn face_id(&self, tri: [usize; 3]) -> Option<usize> {
        self.face_map.get(&sorted3(tri)).copied()
    }

    /// Edge ids of a face in the order [ij, jk, ik].
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        let [i, j, k] = self.faces[f];
        [self.edge_map[&[i, j]], self.edge_map[&[j, k]], self.edge_map[&[i, k]]]
    }

    /// Edges of a face with their curl incidence coefficients.
    pub fn face_edges_signed(&self, f: usize) -> [(usize, f64); 3] {
        let [a, b, c] = self.face_edges(f);
        [(a, 1.0), (b, 1.0), (c, -1.0)]
    }

    /// Orientation area vector ½(x_j − x_i)×(x_k − x_i) of a face.
    pub fn face_area_vector(&self, f: usize) -> Vec3 {
        let [i, j, k] = self.faces[f];
        area_vector(&self.vertices[i], &self.vertices[j], &self.vertices[k])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area_vector(f).norm()
    }

    pub fn edge_vector(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        self.vertices[b] - self.vertices[a]
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.edges.len()).map(|e| self.edge_vector(e).norm()).fold(0.0, f64::max)
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_boundary_slot[f] != NONE
    }

    /// Position of a face in `boundary_faces`, if it is a boundary face.
    pub fn boundary_slot(&self, f: usize) -> Option<usize> {
        let s = self.face_boundary_slot[f];
        (s != NONE).then_some(s)
    }

    /// +1 if the face's orientation normal points out of Ω (boundary faces only).
    pub fn outward_sign(&self, f: usize) -> f64 {
        self.outward[self.face_boundary_slot[f]]
    }

    /// Unit outward normal of a boundary face.
    pub fn outward_normal(&self, f: usize) -> Vec3 {
        self.face_area_vector(f).normalize() * self.outward_sign(f)
    }

    pub fn boundary_components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn face_component(&self, f: usize) -> Option<usize> {
        let c = self.face_component[f];
        (c != NONE).then_some(c)
    }

    pub fn vertex_component(&self, v: usize) -> Option<usize> {
        let c = self.vertex_component[v];
        (c != NONE).then_some(c)
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_component[v] != NONE
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.is_boundary_vertex(v)).collect()
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    /// Position of an edge in `boundary_edges`, if it is a boundary edge.
    pub fn boundary_edge_slot(&self, e: usize) -> Option<usize> {
        let s = self.edge_boundary_slot[e];
        (s != NONE).then_some(s)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_on_boundary[e]
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| !self.is_boundary_vertex(v)).collect()
    }

    pub fn interior_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| !self.edge_on_boundary[e]).collect()
    }

    pub fn interior_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| !self.is_boundary_face(f)).collect()
    }

    pub fn cuts(&self) -> &[CutSurface] {
        &self.cuts
    }

    /// Cut with 1-based index `j`.
    pub fn cut(&self, j: usize) -> Result<&CutSurface> {
        if j == 0 || j > self.cuts.len() {
            return Err(Error::BadId { index: j, count: self.cuts.len() });
        }
        Ok(&self.cuts[j - 1])
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let p = self.tet_points(t);
        (p[0] + p[1] + p[2] + p[3]) / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tet() -> Mesh {
        Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()], vec![[0, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn single_tet_entities() {
        let m = unit_tet();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces(), m.num_tets()), (4, 6, 4, 1));
        assert_eq!(m.boundary_faces().len(), 4);
        assert_eq!(m.boundary_components().len(), 1);
    }

    #[test]
    fn negative_cells_are_reoriented() {
        let m = Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()], vec![[0, 2, 1, 3]]).unwrap();
        assert!(m.volume(0) > 0.0);
    }

    #[test]
    fn degenerate_cell_rejected() {
        let r = Mesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::new(1.0, 1.0, 0.0)], vec![[0, 1, 2, 3]]);
        assert!(matches!(r, Err(Error::Topology(_))));
    }

    #[test]
    fn face_area_vectors_close_per_cell() {
        let m = generate_primitive(&Primitive::Cube { n: 2 }).unwrap();
        for t in 0..m.num_tets() {
            let s: Vec3 = (0..4).map(|k| m.face_area_vector(m.tet_faces(t)[k]) * m.tet_face_signs(t)[k]).sum();
            assert!(s.norm() < 1e-12 * m.volume(t).cbrt().powi(2));
        }
    }

    #[test]
    fn outward_normals_integrate_constants_to_zero() {
        let m = generate_primitive(&Primitive::SphericalShell { r_in: 1.0, r_out: 2.0, refinement: 1 }).unwrap();
        let c = Vec3::new(0.3, -1.2, 0.7);
        let total: f64 = m.boundary_faces().iter().map(|&f| c.dot(&m.face_area_vector(f)) * m.outward_sign(f)).sum();
        let scale: f64 = m.boundary_faces().iter().map(|&f| m.face_area(f)).sum::<f64>() * c.norm();
        assert!(total.abs() < 1e-12 * scale);
    }
}
