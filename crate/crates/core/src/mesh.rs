//! Tetrahedral meshes of the conductor/insulator box, their face and edge
//! sets, and the geometric data the forms need.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Point = Vector3<f64>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("missing region tag: {0}")]
    MissingRegion(String),
    #[error("degenerate tetrahedron {cell} (volume {volume:e})")]
    Degenerate { cell: usize, volume: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Conductor,
    Insulator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceKind {
    InteriorConductor,
    InteriorInsulator,
    /// Conductor/insulator interface. The owner is always the conductor cell.
    Interface,
    /// Boundary of the box.
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub vertices: [usize; 4],
    pub region: Region,
    pub material: String,
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Sorted vertex ids.
    pub vertices: [usize; 3],
    pub owner: usize,
    /// Local face index in the owner (the face opposite that local vertex).
    pub owner_local: usize,
    pub neighbor: Option<(usize, usize)>,
    pub kind: FaceKind,
    /// Unit normal pointing out of the owner.
    pub normal: Point,
    pub area: f64,
    pub diameter: f64,
}

/// An edge shared by exactly two interface triangles.
#[derive(Clone, Debug)]
pub struct InterfaceEdge {
    pub vertices: [usize; 2],
    pub faces: [usize; 2],
    /// `t_e` and `t'_e`, one per adjacent triangle.
    pub tangents: [Point; 2],
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub origin: Point,
    /// Columns are the edge vectors from vertex 0.
    pub jacobian: Matrix3<f64>,
    pub inverse: Matrix3<f64>,
    pub det: f64,
    pub volume: f64,
    pub diameter: f64,
    pub centroid: Point,
}

impl CellGeometry {
    pub fn to_physical(&self, xi: &Point) -> Point {
        self.origin + self.jacobian * xi
    }

    pub fn to_reference(&self, x: &Point) -> Point {
        self.inverse * (x - self.origin)
    }

    /// Maps a reference gradient to the physical one.
    pub fn push_gradient(&self, g: &Point) -> Point {
        self.inverse.transpose() * g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    DegenerateInterfaceEdge,
    NonManifoldInterfaceEdge,
    ConductorOnBoundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct MeshOptions {
    /// Accept conductor cells with faces on the outer boundary. Those faces are
    /// kept as outer faces but belong to none of the sets the forms use.
    pub allow_conductor_boundary: bool,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub cell_faces: Vec<[usize; 4]>,
    pub interface_edges: Vec<InterfaceEdge>,
    pub geometry: Vec<CellGeometry>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Counts and id lists of the face and edge sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EntitySummary {
    pub interior_conductor: Vec<usize>,
    pub interior_insulator: Vec<usize>,
    pub interface: Vec<usize>,
    pub sigma: Vec<usize>,
    /// Outer faces owned by conductor cells (only with `allow_conductor_boundary`).
    pub outer_conductor: Vec<usize>,
    pub edges: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

fn dist(a: &Point, b: &Point) -> f64 {
    (a - b).norm()
}

fn sorted3(mut v: [usize; 3]) -> [usize; 3] {
    v.sort_unstable();
    v
}

impl Mesh {
    /// Builds all incidence data from vertex coordinates and labelled cells.
    pub fn new(vertices: Vec<Point>, mut cells: Vec<Cell>, opts: &MeshOptions) -> Result<Mesh, MeshError> {
        for (i, c) in cells.iter_mut().enumerate() {
            if c.vertices.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::Topology(format!("cell {i} references a missing vertex")));
            }
            c.vertices.sort_unstable();
        }
        let mut geometry = Vec::with_capacity(cells.len());
        for (i, c) in cells.iter().enumerate() {
            let p: Vec<Point> = c.vertices.iter().map(|&v| vertices[v]).collect();
            let jac = Matrix3::from_columns(&[p[1] - p[0], p[2] - p[0], p[3] - p[0]]);
            let det = jac.determinant();
            let mut diameter: f64 = 0.0;
            for a in 0..4 {
                for b in a + 1..4 {
                    diameter = diameter.max(dist(&p[a], &p[b]));
                }
            }
            let volume = det.abs() / 6.0;
            if !(volume > 1e-14 * diameter.powi(3)) {
                return Err(MeshError::Degenerate { cell: i, volume });
            }
            let inverse = jac.try_inverse().ok_or(MeshError::Degenerate { cell: i, volume })?;
            geometry.push(CellGeometry {
                origin: p[0],
                jacobian: jac,
                inverse,
                det: det.abs(),
                volume,
                diameter,
                centroid: (p[0] + p[1] + p[2] + p[3]) / 4.0,
            });
        }

        let mut slots: BTreeMap<[usize; 3], Vec<(usize, usize)>> = BTreeMap::new();
        for (ci, c) in cells.iter().enumerate() {
            for (lf, idx) in LOCAL_FACES.iter().enumerate() {
                let key = sorted3([c.vertices[idx[0]], c.vertices[idx[1]], c.vertices[idx[2]]]);
                slots.entry(key).or_default().push((ci, lf));
            }
        }

        let mut diagnostics = Vec::new();
        let mut faces = Vec::with_capacity(slots.len());
        let mut cell_faces = vec![[usize::MAX; 4]; cells.len()];
        for (key, mut adj) in slots {
            if adj.len() > 2 {
                return Err(MeshError::Topology(format!("face {key:?} shared by {} cells", adj.len())));
            }
            adj.sort_unstable();
            let kind = match adj.as_slice() {
                [(a, _), (b, _)] => match (cells[*a].region, cells[*b].region) {
                    (Region::Conductor, Region::Conductor) => FaceKind::InteriorConductor,
                    (Region::Insulator, Region::Insulator) => FaceKind::InteriorInsulator,
                    _ => FaceKind::Interface,
                },
                [(a, _)] => {
                    if cells[*a].region == Region::Conductor {
                        if !opts.allow_conductor_boundary {
                            return Err(MeshError::Topology(format!(
                                "boundary face {key:?} belongs to conductor cell {a}"
                            )));
                        }
                        diagnostics.push(Diagnostic {
                            kind: DiagnosticKind::ConductorOnBoundary,
                            message: format!("conductor cell {a} touches the outer boundary at face {key:?}"),
                        });
                    }
                    FaceKind::Outer
                }
                _ => unreachable!(),
            };
            if kind == FaceKind::Interface && cells[adj[0].0].region != Region::Conductor {
                adj.swap(0, 1);
            }
            let (owner, owner_local) = adj[0];
            let neighbor = adj.get(1).copied();
            let p: Vec<Point> = key.iter().map(|&v| vertices[v]).collect();
            let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
            let area = cross.norm() / 2.0;
            let mut normal = cross.normalize();
            let centroid = (p[0] + p[1] + p[2]) / 3.0;
            if normal.dot(&(centroid - geometry[owner].centroid)) < 0.0 {
                normal = -normal;
            }
            let diameter = dist(&p[0], &p[1]).max(dist(&p[1], &p[2])).max(dist(&p[0], &p[2]));
            let id = faces.len();
            cell_faces[owner][owner_local] = id;
            if let Some((nb, nl)) = neighbor {
                cell_faces[nb][nl] = id;
            }
            faces.push(Face { vertices: key, owner, owner_local, neighbor, kind, normal, area, diameter });
        }

        let mut edge_map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            if f.kind != FaceKind::Interface {
                continue;
            }
            let v = f.vertices;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])] {
                edge_map.entry([a, b]).or_default().push(fi);
            }
        }
        let mut interface_edges = Vec::new();
        for (key, fs) in edge_map {
            match fs.len() {
                2 => {
                    let tangents = [0, 1].map(|i| edge_tangent(&vertices, &faces[fs[i]], key));
                    interface_edges.push(InterfaceEdge {
                        vertices: key,
                        faces: [fs[0], fs[1]],
                        tangents,
                        length: dist(&vertices[key[0]], &vertices[key[1]]),
                    });
                }
                1 => diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::DegenerateInterfaceEdge,
                    message: format!("interface edge {key:?} has a single interface triangle"),
                }),
                n => diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::NonManifoldInterfaceEdge,
                    message: format!("interface edge {key:?} has {n} interface triangles"),
                }),
            }
        }
        for d in &diagnostics {
            log::warn!("{}", d.message);
        }

        Ok(Mesh { vertices, cells, faces, cell_faces, interface_edges, geometry, diagnostics })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    pub fn is_sigma(&self, f: usize) -> bool {
        let face = &self.faces[f];
        face.kind == FaceKind::Outer && self.cells[face.owner].region == Region::Insulator
    }

    /// Outward normal of `cell` on face `f`.
    pub fn normal_from(&self, f: usize, cell: usize) -> Point {
        let face = &self.faces[f];
        if face.owner == cell {
            face.normal
        } else {
            -face.normal
        }
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        self.faces[f].vertices.map(|v| self.vertices[v])
    }

    pub fn face_centroid(&self, f: usize) -> Point {
        let p = self.face_points(f);
        (p[0] + p[1] + p[2]) / 3.0
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Bounding box of the conductor cells, if any.
    pub fn conductor_box(&self) -> Option<(Point, Point)> {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        let mut any = false;
        for c in self.cells.iter().filter(|c| c.region == Region::Conductor) {
            any = true;
            for &v in &c.vertices {
                lo = lo.inf(&self.vertices[v]);
                hi = hi.sup(&self.vertices[v]);
            }
        }
        any.then_some((lo, hi))
    }

    pub fn materials(&self) -> Vec<String> {
        let mut m: Vec<String> = self
            .cells
            .iter()
            .filter(|c| c.region == Region::Conductor)
            .map(|c| c.material.clone())
            .collect();
        m.sort();
        m.dedup();
        m
    }
}

/// `n_Γ × ν_T` on the edge `e` of the interface triangle `f`.
fn edge_tangent(vertices: &[Point], f: &Face, e: [usize; 2]) -> Point {
    let a = vertices[e[0]];
    let b = vertices[e[1]];
    let opp = f.vertices.iter().find(|v| !e.contains(v)).copied().unwrap();
    let d = (b - a).normalize();
    let w = (a + b) / 2.0 - vertices[opp];
    let nu = (w - d * w.dot(&d)).normalize();
    f.normal.cross(&nu)
}

pub fn classify_entities(mesh: &Mesh) -> EntitySummary {
    let mut s = EntitySummary::default();
    for (i, f) in mesh.faces.iter().enumerate() {
        match f.kind {
            FaceKind::InteriorConductor => s.interior_conductor.push(i),
            FaceKind::InteriorInsulator => s.interior_insulator.push(i),
            FaceKind::Interface => s.interface.push(i),
            FaceKind::Outer if mesh.is_sigma(i) => s.sigma.push(i),
            FaceKind::Outer => s.outer_conductor.push(i),
        }
    }
    s.edges = (0..mesh.interface_edges.len()).collect();
    s.diagnostics = mesh.diagnostics.clone();
    s
}

/// Vertex-pair lookup of interface edges, keyed by sorted vertex ids.
pub fn interface_edge_index(mesh: &Mesh) -> HashMap<[usize; 2], usize> {
    mesh.interface_edges.iter().enumerate().map(|(i, e)| (e.vertices, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tet(v: [usize; 4], region: Region) -> Cell {
        Cell { vertices: v, region, material: "m".into() }
    }

    #[test]
    fn reference_tet_diameter() {
        let v = vec![Point::zeros(), Point::x(), Point::y(), Point::z()];
        let m = Mesh::new(v, vec![tet([0, 1, 2, 3], Region::Insulator)], &MeshOptions::default()).unwrap();
        assert!((m.geometry[0].diameter - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.faces.len(), 4);
        assert!(m.faces.iter().all(|f| f.kind == FaceKind::Outer));
    }

    #[test]
    fn regular_tet_diameter() {
        let s = 1.0 / 2f64.sqrt();
        let v = vec![
            Point::new(1.0, 0.0, -s) / 2.0,
            Point::new(-1.0, 0.0, -s) / 2.0,
            Point::new(0.0, 1.0, s) / 2.0,
            Point::new(0.0, -1.0, s) / 2.0,
        ];
        let m = Mesh::new(v, vec![tet([0, 1, 2, 3], Region::Insulator)], &MeshOptions::default()).unwrap();
        assert!((m.geometry[0].diameter - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_tet_is_degenerate() {
        let v = vec![Point::zeros(), Point::x(), Point::y(), Point::new(1.0, 1.0, 0.0)];
        let r = Mesh::new(v, vec![tet([0, 1, 2, 3], Region::Insulator)], &MeshOptions::default());
        assert!(matches!(r, Err(MeshError::Degenerate { .. })));
    }

    #[test]
    fn outward_normals() {
        let v = vec![Point::zeros(), Point::x(), Point::y(), Point::z(), Point::new(1.0, 1.0, 1.0)];
        let cells = vec![tet([0, 1, 2, 3], Region::Insulator), tet([1, 2, 3, 4], Region::Insulator)];
        let m = Mesh::new(v, cells, &MeshOptions::default()).unwrap();
        for (ci, fs) in m.cell_faces.iter().enumerate() {
            for &f in fs {
                let n = m.normal_from(f, ci);
                assert!((n.norm() - 1.0).abs() < 1e-14);
                assert!(n.dot(&(m.face_centroid(f) - m.geometry[ci].centroid)) > 0.0);
            }
        }
    }
}
