//! Gmsh MSH 2.2 ASCII input and output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Mesh, Result, Vec3};

pub fn load_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_msh(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.it.by_ref() {
            let l = l.trim();
            if !l.is_empty() {
                self.line = i + 1;
                return Some(l);
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<&'a str> {
        let line = self.line;
        self.next().ok_or_else(|| Error::parse(line, format!("unexpected end of file, expected {what}")))
    }

    fn count(&mut self) -> Result<usize> {
        let l = self.expect("count")?;
        l.parse().map_err(|_| Error::parse(self.line, format!("bad count {l:?}")))
    }

    fn end(&mut self, section: &str) -> Result<()> {
        let l = self.expect(section)?;
        if l != format!("$End{section}") {
            return Err(Error::parse(self.line, format!("expected $End{section}, found {l:?}")));
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    let t = tok.ok_or_else(|| Error::parse(line, "missing field"))?;
    t.parse().map_err(|_| Error::parse(line, format!("bad number {t:?}")))
}

enum Group {
    Gamma(usize),
    Sigma(usize),
    Other,
}

pub fn parse_msh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { it: text.lines().enumerate(), line: 0 };
    let mut names: HashMap<(usize, i64), Group> = HashMap::new();
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut elements: Vec<(usize, i64, Vec<i64>, usize)> = Vec::new();
    let (mut have_format, mut have_nodes, mut have_elements) = (false, false, false);

    while let Some(head) = lines.next() {
        match head {
            "$MeshFormat" => {
                let l = lines.expect("format line")?;
                let mut tok = l.split_whitespace();
                let version: f64 = num(tok.next(), lines.line)?;
                let ftype: i32 = num(tok.next(), lines.line)?;
                if !(2.0..3.0).contains(&version) || ftype != 0 {
                    return Err(Error::parse(lines.line, format!("only ASCII MSH 2.x is supported, got {l:?}")));
                }
                lines.end("MeshFormat")?;
                have_format = true;
            }
            "$PhysicalNames" => {
                for _ in 0..lines.count()? {
                    let l = lines.expect("physical name")?;
                    let mut tok = l.splitn(3, char::is_whitespace);
                    let dim: usize = num(tok.next(), lines.line)?;
                    let tag: i64 = num(tok.next(), lines.line)?;
                    let name = tok.next().unwrap_or("").trim().trim_matches('"');
                    let group = if let Some(i) = name.strip_prefix("gamma").and_then(|s| s.parse().ok()) {
                        Group::Gamma(i)
                    } else if let Some(j) = name.strip_prefix("sigma").and_then(|s| s.parse().ok()) {
                        Group::Sigma(j)
                    } else {
                        Group::Other
                    };
                    names.insert((dim, tag), group);
                }
                lines.end("PhysicalNames")?;
            }
            "$Nodes" => {
                for _ in 0..lines.count()? {
                    let l = lines.expect("node")?;
                    let mut tok = l.split_whitespace();
                    let id: i64 = num(tok.next(), lines.line)?;
                    let x: f64 = num(tok.next(), lines.line)?;
                    let y: f64 = num(tok.next(), lines.line)?;
                    let z: f64 = num(tok.next(), lines.line)?;
                    if node_ids.insert(id, vertices.len()).is_some() {
                        return Err(Error::parse(lines.line, format!("duplicate node id {id}")));
                    }
                    vertices.push(Vec3::new(x, y, z));
                }
                lines.end("Nodes")?;
                have_nodes = true;
            }
            "$Elements" => {
                for _ in 0..lines.count()? {
                    let l = lines.expect("element")?;
                    let tok: Vec<&str> = l.split_whitespace().collect();
                    let ln = lines.line;
                    let etype: usize = num(tok.get(1).copied(), ln)?;
                    let ntags: usize = num(tok.get(2).copied(), ln)?;
                    let phys: i64 = if ntags > 0 { num(tok.get(3).copied(), ln)? } else { 0 };
                    let nodes = tok.get(3 + ntags..).unwrap_or(&[]).iter().map(|t| num(Some(t), ln)).collect::<Result<Vec<i64>>>()?;
                    elements.push((etype, phys, nodes, ln));
                }
                lines.end("Elements")?;
                have_elements = true;
            }
            s if s.starts_with('$') => {
                // skip unknown sections
                let end = format!("$End{}", &s[1..]);
                while lines.expect(&end)? != end {}
            }
            other => return Err(Error::parse(lines.line, format!("unexpected line {other:?}"))),
        }
    }
    for (ok, sec) in [(have_format, "$MeshFormat"), (have_nodes, "$Nodes"), (have_elements, "$Elements")] {
        if !ok {
            return Err(Error::parse(lines.line, format!("missing {sec} section")));
        }
    }

    let lookup = |ids: &[i64], want: usize, ln: usize| -> Result<Vec<usize>> {
        if ids.len() != want {
            return Err(Error::parse(ln, format!("expected {want} nodes, found {}", ids.len())));
        }
        ids.iter().map(|i| node_ids.get(i).copied().ok_or_else(|| Error::parse(ln, format!("unknown node {i}")))).collect()
    };
    let mut tets = Vec::new();
    let mut gammas: Vec<Vec<[usize; 3]>> = Vec::new();
    let mut sigmas: Vec<Vec<[usize; 3]>> = Vec::new();
    for (etype, phys, nodes, ln) in &elements {
        match etype {
            4 => {
                let v = lookup(nodes, 4, *ln)?;
                tets.push([v[0], v[1], v[2], v[3]]);
            }
            2 => {
                let v = lookup(nodes, 3, *ln)?;
                let tri = [v[0], v[1], v[2]];
                let slot = |list: &mut Vec<Vec<[usize; 3]>>, i: usize| {
                    if list.len() <= i {
                        list.resize(i + 1, Vec::new());
                    }
                    list[i].push(tri);
                };
                match names.get(&(2, *phys)) {
                    Some(Group::Gamma(i)) => slot(&mut gammas, *i),
                    Some(Group::Sigma(j)) if *j >= 1 => slot(&mut sigmas, *j - 1),
                    _ => return Err(Error::Tag(format!("triangle on line {ln} has physical tag {phys} that is not gamma<i> or sigma<j>"))),
                }
            }
            _ => {}
        }
    }
    if let Some(i) = gammas.iter().skip(1).position(|g| g.is_empty()) {
        return Err(Error::Tag(format!("gamma{} has no triangles", i + 1)));
    }
    if let Some(j) = sigmas.iter().position(|s| s.is_empty()) {
        return Err(Error::Tag(format!("sigma{} has no triangles", j + 1)));
    }
    Mesh::with_components(vertices, tets, &gammas)?.with_cuts(&sigmas)
}

pub fn write_msh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let comps = mesh.boundary_components();
    let cuts = mesh.cuts();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n");
    let _ = writeln!(s, "{}", comps.len() + cuts.len() + 1);
    for i in 0..comps.len() {
        let _ = writeln!(s, "2 {} \"gamma{i}\"", i + 1);
    }
    for j in 1..=cuts.len() {
        let _ = writeln!(s, "2 {} \"sigma{j}\"", comps.len() + j);
    }
    let _ = writeln!(s, "3 {} \"domain\"", comps.len() + cuts.len() + 1);
    s.push_str("$EndPhysicalNames\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.num_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} {:?}", i + 1, v.x, v.y, v.z);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let ntri: usize = comps.iter().map(Vec::len).sum::<usize>() + cuts.iter().map(|c| c.faces.len()).sum::<usize>();
    let _ = writeln!(s, "{}", ntri + mesh.num_tets());
    let mut id = 0;
    for (i, c) in comps.iter().enumerate() {
        for &f in c {
            id += 1;
            let [a, b, cc] = mesh.faces()[f];
            let _ = writeln!(s, "{id} 2 2 {} {} {} {} {}", i + 1, i + 1, a + 1, b + 1, cc + 1);
        }
    }
    for (j, cut) in cuts.iter().enumerate() {
        let tag = comps.len() + j + 1;
        for (&f, &sg) in cut.faces.iter().zip(&cut.signs) {
            id += 1;
            let [a, b, c] = mesh.faces()[f];
            let (b, c) = if sg > 0.0 { (b, c) } else { (c, b) };
            let _ = writeln!(s, "{id} 2 2 {tag} {tag} {} {} {}", a + 1, b + 1, c + 1);
        }
    }
    let vol = comps.len() + cuts.len() + 1;
    for t in mesh.tets() {
        id += 1;
        let _ = writeln!(s, "{id} 4 2 {vol} {vol} {} {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1, t[3] + 1);
    }
    s.push_str("$EndElements\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{betti_counts, generate_primitive, Primitive};

    const ONE_TET: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n2\n2 1 \"gamma0\"\n3 2 \"omega\"\n$EndPhysicalNames\n\
$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n$Elements\n5\n\
1 2 2 1 1 1 2 3\n2 2 2 1 1 1 2 4\n3 2 2 1 1 1 3 4\n4 2 2 1 1 2 3 4\n5 4 2 2 2 1 2 3 4\n$EndElements\n";

    #[test]
    fn single_tet_file() {
        let m = parse_msh(ONE_TET).unwrap();
        assert_eq!(m.num_tets(), 1);
        assert_eq!(m.boundary_faces().len(), 4);
        assert_eq!(betti_counts(&m).unwrap(), (0, 0));
    }

    #[test]
    fn missing_nodes_is_parse_error() {
        let start = ONE_TET.find("$Nodes").unwrap();
        let end = ONE_TET.find("$Elements").unwrap();
        let broken = format!("{}{}", &ONE_TET[..start], &ONE_TET[end..]);
        assert!(matches!(parse_msh(&broken), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_gamma0_is_tag_error() {
        let broken = ONE_TET.replace("\"gamma0\"", "\"gamma1\"");
        assert!(matches!(parse_msh(&broken), Err(Error::Tag(_))));
    }

    #[test]
    fn round_trip() {
        for p in [
            Primitive::Cube { n: 2 },
            Primitive::SphericalShell { r_in: 1.0, r_out: 2.0, refinement: 1 },
            Primitive::SolidTorus { major: 2.0, minor: 0.5, refinement: 1, with_cut: true },
        ] {
            let m = generate_primitive(&p).unwrap();
            let back = parse_msh(&write_msh(&m)).unwrap();
            assert!(back == m, "{p:?}");
        }
    }
}
