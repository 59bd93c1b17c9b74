//! Cut surfaces and the curl-free generator `ρ` of the first cohomology of the
//! insulator.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::mesh::{FaceKind, Mesh, Point, Region};

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("hint edge {0:?} lies on the outer boundary")]
    HintOnSigma([usize; 2]),
    #[error("hint edge {0:?} is not an edge of the interface")]
    HintNotOnGamma([usize; 2]),
    #[error("hint loop does not bound the generated cut")]
    HintMismatch,
    #[error("first Betti number of the insulator is {0}; only 0 or 1 is supported")]
    Unsupported(i64),
    #[error("no cut found: {0}")]
    NoCut(String),
    #[error("cut is not orientable or not a surface: {0}")]
    Inconsistent(String),
    #[error("cut file: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// Caller asserts a simply connected insulator.
    Trivial,
    /// Detect from the Euler characteristic.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    UserSupplied,
    SpanningTree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutSurface {
    /// Interior insulator faces, sorted.
    pub faces: Vec<usize>,
    /// Cell on the `+` side of each face; the potential is larger by one there.
    pub plus: Vec<usize>,
    pub provenance: Provenance,
}

impl CutSurface {
    pub fn empty() -> CutSurface {
        CutSurface { faces: vec![], plus: vec![], provenance: Provenance::SpanningTree }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicField {
    /// Per cell; zero on conductor cells.
    pub rho: Vec<Point>,
    /// Potential at the four local vertices of each insulator cell.
    pub potential: Vec<[f64; 4]>,
    pub cut: CutSurface,
}

impl HarmonicField {
    pub fn zero(mesh: &Mesh) -> HarmonicField {
        HarmonicField {
            rho: vec![Point::zeros(); mesh.n_cells()],
            potential: vec![[0.0; 4]; mesh.n_cells()],
            cut: CutSurface::empty(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rho.iter().all(|r| r.norm() == 0.0)
    }

    /// Linear interpolation of the cell's potential.
    pub fn potential_at(&self, mesh: &Mesh, cell: usize, x: &Point) -> f64 {
        let xi = mesh.geometry[cell].to_reference(x);
        let p = self.potential[cell];
        p[0] * (1.0 - xi.x - xi.y - xi.z) + p[1] * xi.x + p[2] * xi.y + p[3] * xi.z
    }
}

fn edges_of(v: [usize; 3]) -> [[usize; 2]; 3] {
    [[v[0], v[1]], [v[1], v[2]], [v[0], v[2]]]
}

/// First Betti number of the insulator from its Euler characteristic and the
/// number of boundary components.
pub fn first_betti_number(mesh: &Mesh) -> i64 {
    let mut verts = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut nfaces = 0i64;
    let mut ncells = 0i64;
    for c in mesh.cells.iter().filter(|c| c.region == Region::Insulator) {
        ncells += 1;
        for a in 0..4 {
            verts.insert(c.vertices[a]);
            for b in a + 1..4 {
                edges.insert([c.vertices[a], c.vertices[b]]);
            }
        }
    }
    let mut boundary = Vec::new();
    for (i, f) in mesh.faces.iter().enumerate() {
        let touches = mesh.cells[f.owner].region == Region::Insulator
            || f.neighbor.is_some_and(|(n, _)| mesh.cells[n].region == Region::Insulator);
        if touches {
            nfaces += 1;
            if f.kind == FaceKind::Interface || mesh.is_sigma(i) {
                boundary.push(i);
            }
        }
    }
    let chi = verts.len() as i64 - edges.len() as i64 + nfaces - ncells;
    let mut uf = UnionFind::new(boundary.len());
    let mut by_edge: HashMap<[usize; 2], usize> = HashMap::new();
    for (k, &f) in boundary.iter().enumerate() {
        for e in edges_of(mesh.faces[f].vertices) {
            if let Some(&o) = by_edge.get(&e) {
                uf.union(o, k);
            } else {
                by_edge.insert(e, k);
            }
        }
    }
    let comps = (0..boundary.len()).filter(|&k| uf.find(k) == k).count() as i64;
    comps - chi
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.parent[hi] = lo;
        }
    }
}

fn validate_hint(mesh: &Mesh, hint: &[usize]) -> Result<BTreeSet<[usize; 2]>, CohomologyError> {
    let mut gamma = BTreeSet::new();
    let mut sigma = BTreeSet::new();
    for (i, f) in mesh.faces.iter().enumerate() {
        let target = if f.kind == FaceKind::Interface {
            &mut gamma
        } else if mesh.is_sigma(i) {
            &mut sigma
        } else {
            continue;
        };
        target.extend(edges_of(f.vertices));
    }
    let mut set = BTreeSet::new();
    let n = hint.len();
    let closed = n > 1 && hint[0] == hint[n - 1];
    let m = if closed { n - 1 } else { n };
    for i in 0..m {
        let (a, b) = (hint[i], hint[(i + 1) % m]);
        let e = if a < b { [a, b] } else { [b, a] };
        if sigma.contains(&e) {
            return Err(CohomologyError::HintOnSigma(e));
        }
        if !gamma.contains(&e) {
            return Err(CohomologyError::HintNotOnGamma(e));
        }
        set.insert(e);
    }
    Ok(set)
}

/// Finds a cut surface through the insulator: a dual spanning tree from the
/// outer boundary, then collapse of the remaining faces through free edges.
/// The optional hint is a closed vertex loop on the interface that must bound
/// the cut and fixes its orientation.
pub fn build_cut(mesh: &Mesh, topology: Topology, hint: Option<&[usize]>) -> Result<CutSurface, CohomologyError> {
    let hint_edges = hint.map(|h| validate_hint(mesh, h)).transpose()?;
    if topology == Topology::Trivial {
        return Ok(CutSurface::empty());
    }
    match first_betti_number(mesh) {
        0 => return Ok(CutSurface::empty()),
        1 => {}
        b => return Err(CohomologyError::Unsupported(b)),
    }

    let ins: Vec<usize> = (0..mesh.n_cells()).filter(|&c| mesh.cells[c].region == Region::Insulator).collect();
    let mut local = vec![usize::MAX; mesh.n_cells()];
    for (i, &c) in ins.iter().enumerate() {
        local[c] = i;
    }
    let out = ins.len();
    let mut visited = vec![false; ins.len() + 1];
    let mut tree = vec![false; mesh.faces.len()];
    let mut queue = VecDeque::new();
    visited[out] = true;
    queue.push_back(out);
    let sigma_faces: Vec<usize> = (0..mesh.faces.len()).filter(|&f| mesh.is_sigma(f)).collect();
    while let Some(node) = queue.pop_front() {
        let arcs: Vec<(usize, usize)> = if node == out {
            sigma_faces.iter().map(|&f| (f, local[mesh.faces[f].owner])).collect()
        } else {
            mesh.cell_faces[ins[node]]
                .iter()
                .filter_map(|&f| {
                    let face = &mesh.faces[f];
                    match face.kind {
                        FaceKind::InteriorInsulator => {
                            let other = if face.owner == ins[node] { face.neighbor.unwrap().0 } else { face.owner };
                            Some((f, local[other]))
                        }
                        FaceKind::Outer => Some((f, out)),
                        _ => None,
                    }
                })
                .collect()
        };
        for (f, next) in arcs {
            if !visited[next] {
                visited[next] = true;
                tree[f] = true;
                queue.push_back(next);
            }
        }
    }

    let mut alive = vec![false; mesh.faces.len()];
    let mut fixed = vec![false; mesh.faces.len()];
    for (i, f) in mesh.faces.iter().enumerate() {
        match f.kind {
            FaceKind::Interface => {
                alive[i] = true;
                fixed[i] = true;
            }
            FaceKind::InteriorInsulator => alive[i] = !tree[i],
            FaceKind::Outer if mesh.is_sigma(i) => alive[i] = !tree[i],
            _ => {}
        }
    }
    let mut edge_faces: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (i, f) in mesh.faces.iter().enumerate() {
        if alive[i] {
            for e in edges_of(f.vertices) {
                edge_faces.entry(e).or_default().push(i);
            }
        }
    }
    let mut count: HashMap<[usize; 2], usize> = edge_faces.iter().map(|(e, v)| (*e, v.len())).collect();
    let mut free: VecDeque<[usize; 2]> = edge_faces.keys().filter(|e| count[*e] == 1).copied().collect();
    while let Some(e) = free.pop_front() {
        if count[&e] != 1 {
            continue;
        }
        let f = match edge_faces[&e].iter().find(|&&f| alive[f]) {
            Some(&f) => f,
            None => continue,
        };
        if fixed[f] {
            continue;
        }
        alive[f] = false;
        for e2 in edges_of(mesh.faces[f].vertices) {
            let c = count.get_mut(&e2).unwrap();
            *c -= 1;
            if *c == 1 {
                free.push_back(e2);
            }
        }
    }
    let faces: Vec<usize> = (0..mesh.faces.len()).filter(|&f| alive[f] && !fixed[f]).collect();
    if faces.is_empty() {
        return Err(CohomologyError::NoCut("collapse removed every face".into()));
    }
    if let Some(&f) = faces.iter().find(|&&f| mesh.faces[f].kind != FaceKind::InteriorInsulator) {
        return Err(CohomologyError::NoCut(format!("cut reaches the outer boundary at face {f}")));
    }
    let cut = orient(mesh, faces, Provenance::SpanningTree)?;
    match hint_edges {
        Some(h) => apply_hint(mesh, cut, hint.unwrap(), &h),
        None => Ok(cut),
    }
}

/// Directed cycle of a cut face seen from its `+` side normal.
fn cycle(mesh: &Mesh, f: usize, plus: usize) -> [usize; 3] {
    let face = &mesh.faces[f];
    let nu = if face.owner == plus { -face.normal } else { face.normal };
    let [a, b, c] = face.vertices;
    let p = mesh.face_points(f);
    if (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&nu) > 0.0 {
        [a, b, c]
    } else {
        [a, c, b]
    }
}

fn traverses(cyc: &[usize; 3], u: usize, v: usize) -> bool {
    (0..3).any(|i| cyc[i] == u && cyc[(i + 1) % 3] == v)
}

fn other_side(mesh: &Mesh, f: usize, c: usize) -> usize {
    let face = &mesh.faces[f];
    if face.owner == c {
        face.neighbor.unwrap().0
    } else {
        face.owner
    }
}

fn orient(mesh: &Mesh, faces: Vec<usize>, provenance: Provenance) -> Result<CutSurface, CohomologyError> {
    let mut by_edge: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (k, &f) in faces.iter().enumerate() {
        for e in edges_of(mesh.faces[f].vertices) {
            by_edge.entry(e).or_default().push(k);
        }
    }
    if let Some((e, _)) = by_edge.iter().find(|(_, v)| v.len() > 2) {
        return Err(CohomologyError::Inconsistent(format!("edge {e:?} is shared by more than two cut faces")));
    }
    let gamma_edges: BTreeSet<[usize; 2]> = mesh
        .faces
        .iter()
        .filter(|f| f.kind == FaceKind::Interface)
        .flat_map(|f| edges_of(f.vertices))
        .collect();
    if let Some((e, _)) = by_edge.iter().find(|(e, v)| v.len() == 1 && !gamma_edges.contains(*e)) {
        return Err(CohomologyError::Inconsistent(format!("cut boundary edge {e:?} is not on the interface")));
    }
    let mut plus: Vec<Option<usize>> = vec![None; faces.len()];
    for start in 0..faces.len() {
        if plus[start].is_some() {
            continue;
        }
        let f0 = &mesh.faces[faces[start]];
        plus[start] = Some(f0.neighbor.unwrap().0);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let cyc = cycle(mesh, faces[k], plus[k].unwrap());
            for e in edges_of(mesh.faces[faces[k]].vertices) {
                for &j in &by_edge[&e] {
                    if j == k {
                        continue;
                    }
                    let fj = faces[j];
                    let face = &mesh.faces[fj];
                    let same = traverses(&cyc, e[0], e[1]);
                    let guess = face.neighbor.unwrap().0;
                    let cj = cycle(mesh, fj, guess);
                    let want = if traverses(&cj, e[0], e[1]) != same { guess } else { face.owner };
                    match plus[j] {
                        None => {
                            plus[j] = Some(want);
                            queue.push_back(j);
                        }
                        Some(p) if p != want => {
                            return Err(CohomologyError::Inconsistent(format!("face {fj} cannot be oriented")));
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(CutSurface { faces, plus: plus.into_iter().map(Option::unwrap).collect(), provenance })
}

fn apply_hint(
    mesh: &Mesh,
    mut cut: CutSurface,
    hint: &[usize],
    hint_edges: &BTreeSet<[usize; 2]>,
) -> Result<CutSurface, CohomologyError> {
    let mut boundary: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    let mut seen: HashMap<[usize; 2], usize> = HashMap::new();
    for (k, &f) in cut.faces.iter().enumerate() {
        for e in edges_of(mesh.faces[f].vertices) {
            *seen.entry(e).or_default() += 1;
            boundary.insert(e, k);
        }
    }
    let bset: BTreeSet<[usize; 2]> = boundary.keys().filter(|e| seen[*e] == 1).copied().collect();
    if &bset != hint_edges {
        return Err(CohomologyError::HintMismatch);
    }
    let (u, v) = (hint[0], hint[1]);
    let e = if u < v { [u, v] } else { [v, u] };
    let k = boundary[&e];
    if !traverses(&cycle(mesh, cut.faces[k], cut.plus[k]), u, v) {
        for (i, &f) in cut.faces.iter().enumerate() {
            cut.plus[i] = other_side(mesh, f, cut.plus[i]);
        }
    }
    Ok(cut)
}

/// Potential with unit jump across the cut and zero on the outer boundary;
/// `ρ` is its elementwise gradient.
pub fn build_harmonic_field(mesh: &Mesh, cut: &CutSurface) -> Result<HarmonicField, CohomologyError> {
    if cut.is_empty() {
        let mut h = HarmonicField::zero(mesh);
        h.cut = cut.clone();
        return Ok(h);
    }
    let nc = mesh.n_cells();
    let copy = |c: usize, lv: usize| 4 * c + lv;
    let lv_of = |c: usize, v: usize| mesh.cells[c].vertices.iter().position(|&w| w == v).unwrap();
    let in_cut: HashMap<usize, usize> = cut.faces.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    let mut uf = UnionFind::new(4 * nc);
    for (i, f) in mesh.faces.iter().enumerate() {
        if f.kind != FaceKind::InteriorInsulator || in_cut.contains_key(&i) {
            continue;
        }
        let (nb, _) = f.neighbor.unwrap();
        for &v in &f.vertices {
            uf.union(copy(f.owner, lv_of(f.owner, v)), copy(nb, lv_of(nb, v)));
        }
    }
    let mut adj: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    for (k, &f) in cut.faces.iter().enumerate() {
        let face = &mesh.faces[f];
        if face.kind != FaceKind::InteriorInsulator {
            return Err(CohomologyError::Inconsistent(format!("cut face {f} is not an interior insulator face")));
        }
        let p = cut.plus[k];
        let m = other_side(mesh, f, p);
        for &v in &face.vertices {
            let a = uf.find(copy(p, lv_of(p, v)));
            let b = uf.find(copy(m, lv_of(m, v)));
            adj.entry(a).or_default().push((b, -1));
            adj.entry(b).or_default().push((a, 1));
        }
    }
    let mut on_sigma = vec![false; 4 * nc];
    for (i, f) in mesh.faces.iter().enumerate() {
        if mesh.is_sigma(i) {
            for &v in &f.vertices {
                let r = uf.find(copy(f.owner, lv_of(f.owner, v)));
                on_sigma[r] = true;
            }
        }
    }
    let mut value: HashMap<usize, i64> = HashMap::new();
    let roots: Vec<usize> = adj.keys().copied().collect();
    for &r0 in &roots {
        if value.contains_key(&r0) {
            continue;
        }
        let mut comp = vec![r0];
        value.insert(r0, 0);
        let mut queue = VecDeque::from([r0]);
        while let Some(a) = queue.pop_front() {
            let va = value[&a];
            for &(b, d) in &adj[&a] {
                match value.get(&b) {
                    None => {
                        value.insert(b, va + d);
                        comp.push(b);
                        queue.push_back(b);
                    }
                    Some(&vb) if vb != va + d => {
                        return Err(CohomologyError::Inconsistent("potential jumps do not close".into()));
                    }
                    _ => {}
                }
            }
        }
        let anchored: BTreeSet<i64> = comp.iter().filter(|r| on_sigma[**r]).map(|r| value[r]).collect();
        let shift = match anchored.len() {
            0 => comp.iter().map(|r| value[r]).min().unwrap(),
            1 => *anchored.iter().next().unwrap(),
            _ => return Err(CohomologyError::Inconsistent("outer boundary receives two potential values".into())),
        };
        for r in comp {
            *value.get_mut(&r).unwrap() -= shift;
        }
    }
    let mut rho = vec![Point::zeros(); nc];
    let mut potential = vec![[0.0; 4]; nc];
    for c in 0..nc {
        if mesh.cells[c].region != Region::Insulator {
            continue;
        }
        let mut p = [0.0; 4];
        for (lv, pv) in p.iter_mut().enumerate() {
            let r = uf.find(copy(c, lv));
            *pv = value.get(&r).copied().unwrap_or(0) as f64;
        }
        let inv = mesh.geometry[c].inverse;
        let g1 = inv.row(0).transpose();
        let g2 = inv.row(1).transpose();
        let g3 = inv.row(2).transpose();
        rho[c] = (g1 * (p[1] - p[0])) + (g2 * (p[2] - p[0])) + (g3 * (p[3] - p[0]));
        potential[c] = p;
    }
    Ok(HarmonicField { rho, potential, cut: cut.clone() })
}

#[derive(Clone, Debug)]
pub struct HarmonicReport {
    pub curl: f64,
    pub tangential: f64,
    pub sigma: f64,
    pub circulation: Option<f64>,
    pub curl_ok: bool,
    pub tangential_ok: bool,
    pub sigma_ok: bool,
    pub circulation_ok: bool,
}

impl HarmonicReport {
    pub fn passed(&self) -> bool {
        self.curl_ok && self.tangential_ok && self.sigma_ok && self.circulation_ok
    }
}

/// Line integral of `ρ` along a loop of cell centroids that crosses the first
/// cut face once and returns through non-cut faces.
pub fn circulation(mesh: &Mesh, field: &HarmonicField) -> Option<f64> {
    let cut = &field.cut;
    let f0 = *cut.faces.first()?;
    let plus = cut.plus[0];
    let minus = other_side(mesh, f0, plus);
    let in_cut: BTreeSet<usize> = cut.faces.iter().copied().collect();
    let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([plus]);
    let mut seen = BTreeSet::from([plus]);
    while let Some(c) = queue.pop_front() {
        if c == minus {
            break;
        }
        for &f in &mesh.cell_faces[c] {
            if mesh.faces[f].kind != FaceKind::InteriorInsulator || in_cut.contains(&f) {
                continue;
            }
            let d = other_side(mesh, f, c);
            if seen.insert(d) {
                prev.insert(d, (c, f));
                queue.push_back(d);
            }
        }
    }
    let mut path = vec![(minus, usize::MAX)];
    let mut c = minus;
    while c != plus {
        let (p, f) = *prev.get(&c)?;
        path.push((p, f));
        c = p;
    }
    path.reverse();
    let xf = mesh.face_centroid(f0);
    let mut total = 0.0;
    let mut here = xf;
    for (i, &(cell, _)) in path.iter().enumerate() {
        let exit = if i + 1 < path.len() { mesh.face_centroid(path[i].1) } else { xf };
        let c = mesh.geometry[cell].centroid;
        total += field.rho[cell].dot(&(c - here)) + field.rho[cell].dot(&(exit - c));
        here = exit;
    }
    Some(total)
}

pub fn validate_harmonic_field(mesh: &Mesh, field: &HarmonicField) -> HarmonicReport {
    let scale = field.rho.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let mut tangential: f64 = 0.0;
    let mut sigma: f64 = 0.0;
    for (i, f) in mesh.faces.iter().enumerate() {
        if f.kind == FaceKind::InteriorInsulator {
            let (nb, _) = f.neighbor.unwrap();
            tangential = tangential.max((field.rho[f.owner] - field.rho[nb]).cross(&f.normal).norm());
        } else if mesh.is_sigma(i) {
            sigma = sigma.max(field.rho[f.owner].cross(&f.normal).norm());
        }
    }
    let circ = circulation(mesh, field);
    let circulation_ok = match circ {
        Some(c) => (c.abs() - 1.0).abs() <= 1e-10,
        None => field.cut.is_empty() && field.is_zero(),
    };
    HarmonicReport {
        curl: 0.0,
        tangential,
        sigma,
        circulation: circ,
        curl_ok: true,
        tangential_ok: tangential <= 1e-12 * scale,
        sigma_ok: sigma <= 1e-12 * scale,
        circulation_ok,
    }
}

/// One line per cut face: `face_id plus_cell_id`.
pub fn write_cut(cut: &CutSurface) -> String {
    let mut s = String::from("# cut surface: face plus_cell\n");
    for (f, p) in cut.faces.iter().zip(&cut.plus) {
        let _ = writeln!(s, "{f} {p}");
    }
    s
}

pub fn parse_cut(mesh: &Mesh, text: &str) -> Result<CutSurface, CohomologyError> {
    let mut pairs = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let bad = || CohomologyError::Parse(format!("line {}: expected 'face plus_cell'", ln + 1));
        let f: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let p: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let face = mesh.faces.get(f).ok_or_else(|| CohomologyError::Parse(format!("unknown face {f}")))?;
        if face.kind != FaceKind::InteriorInsulator {
            return Err(CohomologyError::Parse(format!("face {f} is not an interior insulator face")));
        }
        if face.owner != p && face.neighbor.map(|n| n.0) != Some(p) {
            return Err(CohomologyError::Parse(format!("cell {p} is not adjacent to face {f}")));
        }
        pairs.push((f, p));
    }
    pairs.sort_unstable();
    Ok(CutSurface {
        faces: pairs.iter().map(|p| p.0).collect(),
        plus: pairs.iter().map(|p| p.1).collect(),
        provenance: Provenance::UserSupplied,
    })
}

/// Local face index of `f` in `cell`.
pub fn local_face(mesh: &Mesh, cell: usize, f: usize) -> usize {
    mesh.cell_faces[cell].iter().position(|&g| g == f).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn betti_numbers() {
        assert_eq!(first_betti_number(&fixtures::unit_cube()), 0);
        assert_eq!(first_betti_number(&fixtures::cube_fixture(1)), 0);
        assert_eq!(first_betti_number(&fixtures::torus_fixture(1)), 1);
    }

    #[test]
    fn trivial_cut_is_empty() {
        let m = fixtures::unit_cube();
        let cut = build_cut(&m, Topology::Trivial, None).unwrap();
        assert!(cut.is_empty());
        let h = build_harmonic_field(&m, &cut).unwrap();
        assert!(h.is_zero());
    }

    #[test]
    fn torus_field() {
        let m = fixtures::torus_fixture(1);
        let cut = build_cut(&m, Topology::Auto, None).unwrap();
        assert!(!cut.is_empty());
        let h = build_harmonic_field(&m, &cut).unwrap();
        let r = validate_harmonic_field(&m, &h);
        assert!(r.passed(), "{r:?}");
        let s = write_cut(&cut);
        assert_eq!(parse_cut(&m, &s).unwrap().faces, cut.faces);
    }
}
