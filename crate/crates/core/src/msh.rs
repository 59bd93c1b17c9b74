//! Gmsh MSH 2.2 ASCII reader and writer.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::{Cell, FaceKind, Mesh, MeshError, MeshOptions, Point, Region};

/// Numeric physical-tag overrides. Empty lists fall back to group names.
#[derive(Clone, Debug, Default)]
pub struct MshOptions {
    pub conductor_tags: Vec<i64>,
    pub insulator_tags: Vec<i64>,
    pub gamma_tags: Vec<i64>,
    pub sigma_tags: Vec<i64>,
    pub mesh: MeshOptions,
}

pub fn load_msh(path: impl AsRef<Path>, opts: &MshOptions) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_msh(&text, opts)
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.it.by_ref() {
            self.line = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some(t);
            }
        }
        None
    }

    fn expect(&mut self) -> Result<&'a str, MeshError> {
        let line = self.line;
        self.next().ok_or(MeshError::Parse { line, msg: "unexpected end of file".into() })
    }

    fn err(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse { line: self.line, msg: msg.into() }
    }
}

fn num<T: std::str::FromStr>(lines: &Lines, s: Option<&str>) -> Result<T, MeshError> {
    s.and_then(|s| s.parse().ok()).ok_or_else(|| lines.err(format!("bad number {s:?}")))
}

#[derive(Clone, Copy, PartialEq)]
enum Surface {
    Gamma,
    Sigma,
}

pub fn parse_msh(text: &str, opts: &MshOptions) -> Result<Mesh, MeshError> {
    let mut lines = Lines { it: text.lines().enumerate(), line: 0 };
    let mut names: HashMap<(i64, i64), String> = HashMap::new();
    let mut node_index: HashMap<i64, usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut raw_tets: Vec<(i64, [i64; 4])> = Vec::new();
    let mut raw_tris: Vec<(i64, [i64; 3])> = Vec::new();
    let mut seen_format = false;

    while let Some(l) = lines.next() {
        match l {
            "$MeshFormat" => {
                let hdr = lines.expect()?;
                let mut p = hdr.split_whitespace();
                let version = p.next().unwrap_or("");
                let filetype = p.next().unwrap_or("");
                if !version.starts_with("2.2") || filetype != "0" {
                    return Err(lines.err(format!("unsupported format '{hdr}', need 2.2 ASCII")));
                }
                seen_format = true;
                if lines.expect()? != "$EndMeshFormat" {
                    return Err(lines.err("expected $EndMeshFormat"));
                }
            }
            "$PhysicalNames" => {
                let n: usize = { let s = lines.expect()?; num(&lines, Some(s))? };
                for _ in 0..n {
                    let l = lines.expect()?;
                    let mut p = l.splitn(3, char::is_whitespace);
                    let dim: i64 = num(&lines, p.next())?;
                    let tag: i64 = num(&lines, p.next())?;
                    let name = p.next().ok_or_else(|| lines.err("missing physical name"))?;
                    names.insert((dim, tag), name.trim().trim_matches('"').to_string());
                }
                if lines.expect()? != "$EndPhysicalNames" {
                    return Err(lines.err("expected $EndPhysicalNames"));
                }
            }
            "$Nodes" => {
                let n: usize = { let s = lines.expect()?; num(&lines, Some(s))? };
                for _ in 0..n {
                    let l = lines.expect()?;
                    let mut p = l.split_whitespace();
                    let id: i64 = num(&lines, p.next())?;
                    let x: f64 = num(&lines, p.next())?;
                    let y: f64 = num(&lines, p.next())?;
                    let z: f64 = num(&lines, p.next())?;
                    if node_index.insert(id, vertices.len()).is_some() {
                        return Err(lines.err(format!("duplicate node id {id}")));
                    }
                    vertices.push(Point::new(x, y, z));
                }
                if lines.expect()? != "$EndNodes" {
                    return Err(lines.err("expected $EndNodes"));
                }
            }
            "$Elements" => {
                let n: usize = { let s = lines.expect()?; num(&lines, Some(s))? };
                for _ in 0..n {
                    let l = lines.expect()?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 3 {
                        return Err(lines.err("short element line"));
                    }
                    let etype: i64 = num(&lines, Some(f[1]))?;
                    let ntags: usize = num(&lines, Some(f[2]))?;
                    let phys: i64 = if ntags > 0 { num(&lines, f.get(3).copied())? } else { 0 };
                    let nodes = &f[(3 + ntags).min(f.len())..];
                    match etype {
                        4 => {
                            if nodes.len() != 4 {
                                return Err(lines.err("tetrahedron needs 4 nodes"));
                            }
                            let mut v = [0i64; 4];
                            for (k, s) in nodes.iter().enumerate() {
                                v[k] = num(&lines, Some(*s))?;
                            }
                            raw_tets.push((phys, v));
                        }
                        2 => {
                            if nodes.len() != 3 {
                                return Err(lines.err("triangle needs 3 nodes"));
                            }
                            let mut v = [0i64; 3];
                            for (k, s) in nodes.iter().enumerate() {
                                v[k] = num(&lines, Some(*s))?;
                            }
                            raw_tris.push((phys, v));
                        }
                        _ => {}
                    }
                }
                if lines.expect()? != "$EndElements" {
                    return Err(lines.err("expected $EndElements"));
                }
            }
            s if s.starts_with("$End") => return Err(lines.err(format!("stray {s}"))),
            s if s.starts_with('$') => {
                let end = format!("$End{}", &s[1..]);
                loop {
                    if lines.expect()? == end {
                        break;
                    }
                }
            }
            s => return Err(lines.err(format!("unexpected line '{s}'"))),
        }
    }
    if !seen_format {
        return Err(MeshError::Parse { line: 0, msg: "missing $MeshFormat".into() });
    }
    if raw_tets.is_empty() {
        return Err(MeshError::Parse { line: 0, msg: "no tetrahedra".into() });
    }

    let node = |id: i64| -> Result<usize, MeshError> {
        node_index
            .get(&id)
            .copied()
            .ok_or_else(|| MeshError::Topology(format!("element references unknown node {id}")))
    };
    let mut cells = Vec::with_capacity(raw_tets.len());
    for (phys, v) in &raw_tets {
        let name = names.get(&(3, *phys)).cloned();
        let lname = name.as_deref().map(str::to_lowercase).unwrap_or_default();
        let region = if opts.conductor_tags.contains(phys) {
            Region::Conductor
        } else if opts.insulator_tags.contains(phys) {
            Region::Insulator
        } else if lname.starts_with("conductor") {
            Region::Conductor
        } else if lname.starts_with("insulator") {
            Region::Insulator
        } else {
            return Err(MeshError::MissingRegion(format!(
                "tetrahedron with physical tag {phys} ({}) is neither conductor nor insulator",
                name.as_deref().unwrap_or("unnamed")
            )));
        };
        let material = name.unwrap_or_else(|| format!("tag{phys}"));
        cells.push(Cell { vertices: [node(v[0])?, node(v[1])?, node(v[2])?, node(v[3])?], region, material });
    }

    let mut tagged: [BTreeSet<[usize; 3]>; 2] = [BTreeSet::new(), BTreeSet::new()];
    let mut present = [false; 2];
    for (phys, v) in &raw_tris {
        let lname = names.get(&(2, *phys)).map(|s| s.to_lowercase()).unwrap_or_default();
        let kind = if opts.gamma_tags.contains(phys) || lname == "gamma" {
            Surface::Gamma
        } else if opts.sigma_tags.contains(phys) || lname == "sigma" {
            Surface::Sigma
        } else {
            continue;
        };
        let mut key = [node(v[0])?, node(v[1])?, node(v[2])?];
        key.sort_unstable();
        let k = (kind == Surface::Sigma) as usize;
        tagged[k].insert(key);
        present[k] = true;
    }

    let mesh = Mesh::new(vertices, cells, &opts.mesh)?;

    for (k, label) in [(0, "gamma"), (1, "sigma")] {
        if !present[k] {
            continue;
        }
        let built: BTreeSet<[usize; 3]> = mesh
            .faces
            .iter()
            .enumerate()
            .filter(|(i, f)| if k == 0 { f.kind == FaceKind::Interface } else { mesh.is_sigma(*i) })
            .map(|(_, f)| f.vertices)
            .collect();
        if built != tagged[k] {
            let extra = tagged[k].difference(&built).count();
            let missing = built.difference(&tagged[k]).count();
            return Err(MeshError::Topology(format!(
                "{label} surface tags disagree with the cell labels ({extra} tagged faces not on {label}, {missing} {label} faces untagged)"
            )));
        }
    }
    Ok(mesh)
}

/// Serializes a mesh as MSH 2.2 ASCII with named volume groups per material
/// and "gamma"/"sigma" surface groups.
pub fn write_msh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    let mut groups: Vec<(Region, String)> = mesh.cells.iter().map(|c| (c.region, c.material.clone())).collect();
    groups.sort();
    groups.dedup();
    let tag_of: HashMap<(Region, String), usize> =
        groups.iter().cloned().enumerate().map(|(i, g)| (g, i + 1)).collect();
    let gamma_tag = groups.len() + 1;
    let sigma_tag = groups.len() + 2;
    let _ = writeln!(out, "$PhysicalNames\n{}", groups.len() + 2);
    for (g, t) in groups.iter().zip(1..) {
        let name = match (g.0, g.1.to_lowercase().starts_with(match g.0 {
            Region::Conductor => "conductor",
            Region::Insulator => "insulator",
        })) {
            (_, true) => g.1.clone(),
            (Region::Conductor, false) => format!("conductor_{}", g.1),
            (Region::Insulator, false) => format!("insulator_{}", g.1),
        };
        let _ = writeln!(out, "3 {t} \"{name}\"");
    }
    let _ = writeln!(out, "2 {gamma_tag} \"gamma\"\n2 {sigma_tag} \"sigma\"\n$EndPhysicalNames");
    let _ = writeln!(out, "$Nodes\n{}", mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, v.x, v.y, v.z);
    }
    out.push_str("$EndNodes\n");
    let surf: Vec<(usize, [usize; 3])> = mesh
        .faces
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f.kind {
            FaceKind::Interface => Some((gamma_tag, f.vertices)),
            FaceKind::Outer if mesh.is_sigma(i) => Some((sigma_tag, f.vertices)),
            _ => None,
        })
        .collect();
    let _ = writeln!(out, "$Elements\n{}", surf.len() + mesh.cells.len());
    let mut id = 1;
    for (t, v) in &surf {
        let _ = writeln!(out, "{id} 2 2 {t} {t} {} {} {}", v[0] + 1, v[1] + 1, v[2] + 1);
        id += 1;
    }
    for c in &mesh.cells {
        let t = tag_of[&(c.region, c.material.clone())];
        let v = c.vertices;
        let _ = writeln!(out, "{id} 4 2 {t} {t} {} {} {} {}", v[0] + 1, v[1] + 1, v[2] + 1, v[3] + 1);
        id += 1;
    }
    out.push_str("$EndElements\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TETS: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
3 1 \"Conductor\"
3 2 \"insulator\"
$EndPhysicalNames
$Nodes
5
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
5 1 1 1
$EndNodes
$Elements
2
1 4 2 1 1 1 2 3 4
2 4 2 2 2 2 3 4 5
$EndElements
";

    #[test]
    fn two_tets_lenient() {
        let opts = MshOptions { mesh: MeshOptions { allow_conductor_boundary: true }, ..Default::default() };
        let m = parse_msh(TWO_TETS, &opts).unwrap();
        let s = crate::mesh::classify_entities(&m);
        assert_eq!(s.interface.len(), 1);
        assert_eq!(s.interior_conductor.len() + s.interior_insulator.len(), 0);
        assert_eq!(s.sigma.len(), 3);
        assert_eq!(s.outer_conductor.len(), 3);
        assert!(s.edges.is_empty());
        assert_eq!(s.diagnostics.iter().filter(|d| d.kind == crate::mesh::DiagnosticKind::DegenerateInterfaceEdge).count(), 3);
    }

    #[test]
    fn two_tets_strict_is_topology_error() {
        assert!(matches!(parse_msh(TWO_TETS, &MshOptions::default()), Err(MeshError::Topology(_))));
    }

    #[test]
    fn unknown_region() {
        let t = TWO_TETS.replace("\"insulator\"", "\"air\"");
        let opts = MshOptions { mesh: MeshOptions { allow_conductor_boundary: true }, ..Default::default() };
        assert!(matches!(parse_msh(&t, &opts), Err(MeshError::MissingRegion(_))));
        let opts = MshOptions { insulator_tags: vec![2], ..opts };
        assert!(parse_msh(&t, &opts).is_ok());
    }

    #[test]
    fn malformed() {
        assert!(matches!(parse_msh("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n", &MshOptions::default()), Err(MeshError::Parse { .. })));
        let t = TWO_TETS.replace("1 4 2 1 1 1 2 3 4", "1 4 2 1 1 1 2 x 4");
        assert!(matches!(parse_msh(&t, &MshOptions::default()), Err(MeshError::Parse { .. })));
    }
}
