//! Broken polynomial spaces: vector degree-`m` fields on conductor cells and
//! enriched scalar fields on insulator cells, plus the cohomology slot.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{dim_p, dim_p2, LagrangeBasis};
use crate::mesh::{FaceKind, Mesh, Point, Region, LOCAL_FACES};
use crate::quadrature::QuadratureRule;

pub type C64 = Complex64;
pub type CVec3 = Vector3<C64>;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("polynomial degree must be at least 1")]
    ZeroDegree,
    #[error("unknown cell {0}")]
    UnknownCell(usize),
    #[error("enrichment of cell {0} is not independent of P_m")]
    DependentEnrichment(usize),
}

#[derive(Clone, Debug)]
pub struct DgSpace {
    pub degree: usize,
    pub basis: LagrangeBasis,
    /// Degree `m + 1` basis whose edge-node functions enrich interface cells.
    pub enriched: LagrangeBasis,
    pub regions: Vec<Region>,
    pub offsets: Vec<usize>,
    pub ndofs: Vec<usize>,
    /// Per cell, indices into `enriched.nodes` of the extra functions.
    pub extras: Vec<Vec<usize>>,
    pub k_dof: Option<usize>,
    pub n_dofs: usize,
    pub n_conductor: usize,
}

/// Scalar shape functions of one cell at one point: `P_m` first, then extras.
#[derive(Clone, Debug, Default)]
pub struct CellEval {
    pub values: Vec<f64>,
    pub grads: Vec<Point>,
}

/// Reference-coordinate values of both bases at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<Point>>,
    pub evalues: Vec<Vec<f64>>,
    pub egrads: Vec<Vec<Point>>,
}

pub fn build_dg_space(mesh: &Mesh, m: usize, with_k: bool) -> Result<DgSpace, SpaceError> {
    if m == 0 {
        return Err(SpaceError::ZeroDegree);
    }
    let basis = LagrangeBasis::new(m);
    let enriched = LagrangeBasis::new(m + 1);
    let n = basis.len();
    let mut extras = vec![Vec::new(); mesh.n_cells()];
    for (ci, cell) in mesh.cells.iter().enumerate() {
        if cell.region != Region::Insulator {
            continue;
        }
        let gamma: Vec<usize> =
            (0..4).filter(|&lf| mesh.faces[mesh.cell_faces[ci][lf]].kind == FaceKind::Interface).collect();
        if gamma.is_empty() {
            continue;
        }
        let edges = choose_edges(&gamma, &cell.vertices);
        let mut sel: Vec<usize> =
            (0..enriched.len()).filter(|&i| edges.iter().any(|e| enriched.node_on_edge(i, e[0], e[1]))).collect();
        sel.sort_unstable();
        if !independent(&basis, &enriched, &sel) {
            return Err(SpaceError::DependentEnrichment(ci));
        }
        extras[ci] = sel;
    }
    let mut offsets = vec![0; mesh.n_cells()];
    let mut ndofs = vec![0; mesh.n_cells()];
    let mut next = 0;
    for pass in [Region::Conductor, Region::Insulator] {
        for (ci, cell) in mesh.cells.iter().enumerate() {
            if cell.region != pass {
                continue;
            }
            offsets[ci] = next;
            ndofs[ci] = match pass {
                Region::Conductor => 3 * n,
                Region::Insulator => n + extras[ci].len(),
            };
            next += ndofs[ci];
        }
    }
    let n_conductor = mesh.cells.iter().filter(|c| c.region == Region::Conductor).count() * 3 * n;
    let k_dof = with_k.then_some(next);
    let n_dofs = next + with_k as usize;
    Ok(DgSpace {
        degree: m,
        basis,
        enriched,
        regions: mesh.cells.iter().map(|c| c.region).collect(),
        offsets,
        ndofs,
        extras,
        k_dof,
        n_dofs,
        n_conductor,
    })
}

/// Edges (pairs of local vertices) whose degree-`m+1` nodes enrich the cell.
/// Every interface face gets one of its edges; edges of one cell share a vertex.
fn choose_edges(gamma: &[usize], gv: &[usize; 4]) -> Vec<[usize; 2]> {
    let mut left: Vec<usize> = gamma.to_vec();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    while !left.is_empty() {
        if left.len() >= 2 {
            let (f1, f2) = (left[0], left[1]);
            let e: Vec<usize> = (0..4).filter(|&v| v != f1 && v != f2).collect();
            edges.push([e[0], e[1]]);
            left.drain(0..2);
            continue;
        }
        let f = left.pop().unwrap();
        let fv = LOCAL_FACES[f];
        let mut cands: Vec<[usize; 2]> = vec![[fv[0], fv[1]], [fv[1], fv[2]], [fv[0], fv[2]]];
        cands.sort_by_key(|e| {
            let touches = edges.iter().any(|o| o.contains(&e[0]) || o.contains(&e[1]));
            let mut g = [gv[e[0]], gv[e[1]]];
            g.sort_unstable();
            (!touches, g)
        });
        edges.push(cands[0]);
    }
    edges
}

/// `P_m` and the selected degree-`m+1` node functions are linearly independent.
fn independent(basis: &LagrangeBasis, enriched: &LagrangeBasis, sel: &[usize]) -> bool {
    let n = basis.len();
    let ne = enriched.len();
    let mut mat = DMatrix::<f64>::zeros(ne, n + sel.len());
    let mut v = vec![0.0; n];
    let mut g = vec![Point::zeros(); n];
    for (r, x) in enriched.nodes.iter().enumerate() {
        basis.eval(x, &mut v, &mut g);
        for c in 0..n {
            mat[(r, c)] = v[c];
        }
    }
    for (c, &s) in sel.iter().enumerate() {
        mat[(s, n + c)] = 1.0;
    }
    mat.rank(1e-10) == n + sel.len()
}

impl DgSpace {
    pub fn n_scalar(&self) -> usize {
        self.basis.len()
    }

    /// Number of scalar shape functions of a cell (conductor cells have three
    /// vector components per scalar function).
    pub fn n_local_scalar(&self, cell: usize) -> usize {
        self.basis.len() + self.extras[cell].len()
    }

    pub fn check_cell(&self, cell: usize) -> Result<(), SpaceError> {
        if cell < self.offsets.len() {
            Ok(())
        } else {
            Err(SpaceError::UnknownCell(cell))
        }
    }

    /// Evaluates the scalar shape functions of `cell` at the physical point `x`.
    pub fn eval(&self, mesh: &Mesh, cell: usize, x: &Point, out: &mut CellEval) {
        let g = &mesh.geometry[cell];
        let xi = g.to_reference(x);
        self.eval_reference(mesh, cell, &xi, out);
    }

    pub fn eval_reference(&self, mesh: &Mesh, cell: usize, xi: &Point, out: &mut CellEval) {
        let n = self.basis.len();
        let ex = &self.extras[cell];
        out.values.resize(n + ex.len(), 0.0);
        out.grads.resize(n + ex.len(), Point::zeros());
        self.basis.eval(xi, &mut out.values, &mut out.grads);
        if !ex.is_empty() {
            let ne = self.enriched.len();
            let mut v = vec![0.0; ne];
            let mut gr = vec![Point::zeros(); ne];
            self.enriched.eval(xi, &mut v, &mut gr);
            for (k, &s) in ex.iter().enumerate() {
                out.values[n + k] = v[s];
                out.grads[n + k] = gr[s];
            }
        }
        let geo = &mesh.geometry[cell];
        for gr in out.grads.iter_mut() {
            *gr = geo.push_gradient(gr);
        }
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        let n = self.basis.len();
        let ne = self.enriched.len();
        let mut t = Tabulation { values: vec![], grads: vec![], evalues: vec![], egrads: vec![] };
        for q in 0..rule.len() {
            let r = rule.reference(q);
            let xi = Point::new(r[0], r[1], r[2]);
            let mut v = vec![0.0; n];
            let mut g = vec![Point::zeros(); n];
            self.basis.eval(&xi, &mut v, &mut g);
            t.values.push(v);
            t.grads.push(g);
            let mut v = vec![0.0; ne];
            let mut g = vec![Point::zeros(); ne];
            self.enriched.eval(&xi, &mut v, &mut g);
            t.evalues.push(v);
            t.egrads.push(g);
        }
        t
    }

    /// Shape functions of `cell` at point `q` of a tabulated volume rule.
    pub fn eval_table(&self, mesh: &Mesh, cell: usize, tab: &Tabulation, q: usize, out: &mut CellEval) {
        let n = self.basis.len();
        let ex = &self.extras[cell];
        out.values.clear();
        out.grads.clear();
        let geo = &mesh.geometry[cell];
        out.values.extend_from_slice(&tab.values[q]);
        out.grads.extend(tab.grads[q].iter().map(|g| geo.push_gradient(g)));
        for &s in ex {
            out.values.push(tab.evalues[q][s]);
            out.grads.push(geo.push_gradient(&tab.egrads[q][s]));
        }
        debug_assert_eq!(out.values.len(), n + ex.len());
    }

    /// Conductor field value and curl at `x` from the cell's coefficients.
    pub fn conductor_field(&self, mesh: &Mesh, cell: usize, coeffs: &[C64], x: &Point) -> (CVec3, CVec3) {
        let mut e = CellEval::default();
        self.eval(mesh, cell, x, &mut e);
        self.conductor_from_eval(cell, coeffs, &e)
    }

    pub fn conductor_from_eval(&self, cell: usize, coeffs: &[C64], e: &CellEval) -> (CVec3, CVec3) {
        let n = self.basis.len();
        let o = self.offsets[cell];
        let mut v = CVec3::zeros();
        let mut curl = CVec3::zeros();
        for c in 0..3 {
            for i in 0..n {
                let a = coeffs[o + c * n + i];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                v[c] += a * e.values[i];
                let cu = e.grads[i].cross(&unit(c));
                curl += cu.map(|t| a * t);
            }
        }
        (v, curl)
    }

    /// Insulator scalar value and gradient at `x` from the cell's coefficients.
    pub fn insulator_field(&self, mesh: &Mesh, cell: usize, coeffs: &[C64], x: &Point) -> (C64, CVec3) {
        let mut e = CellEval::default();
        self.eval(mesh, cell, x, &mut e);
        self.insulator_from_eval(cell, coeffs, &e)
    }

    pub fn insulator_from_eval(&self, cell: usize, coeffs: &[C64], e: &CellEval) -> (C64, CVec3) {
        let o = self.offsets[cell];
        let mut v = C64::new(0.0, 0.0);
        let mut g = CVec3::zeros();
        for i in 0..e.values.len() {
            let a = coeffs[o + i];
            v += a * e.values[i];
            g += e.grads[i].map(|t| a * t);
        }
        (v, g)
    }

    pub fn k_value(&self, coeffs: &[C64]) -> C64 {
        self.k_dof.map(|k| coeffs[k]).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Nodal interpolation: conductor components and the `P_m` part of the
    /// insulator functions at the Lagrange nodes, extras set to zero.
    pub fn interpolate(
        &self,
        mesh: &Mesh,
        h: impl Fn(usize, &Point) -> CVec3,
        psi: impl Fn(usize, &Point) -> C64,
        k: C64,
    ) -> Vec<C64> {
        let n = self.basis.len();
        let mut x = vec![C64::new(0.0, 0.0); self.n_dofs];
        for (ci, r) in self.regions.iter().enumerate() {
            let geo = &mesh.geometry[ci];
            let o = self.offsets[ci];
            for (i, xi) in self.basis.nodes.iter().enumerate() {
                let p = geo.to_physical(xi);
                match r {
                    Region::Conductor => {
                        let v = h(ci, &p);
                        for c in 0..3 {
                            x[o + c * n + i] = v[c];
                        }
                    }
                    Region::Insulator => x[o + i] = psi(ci, &p),
                }
            }
        }
        if let Some(kd) = self.k_dof {
            x[kd] = k;
        }
        x
    }

    /// Interpolant of a global scalar potential that keeps all jumps zero: the
    /// degree-`m` nodal interpolant in the insulator and its exact gradient in
    /// the conductor.
    pub fn interpolate_potential(&self, mesh: &Mesh, chi: impl Fn(&Point) -> C64) -> Vec<C64> {
        let n = self.basis.len();
        let mut x = vec![C64::new(0.0, 0.0); self.n_dofs];
        let mut e = CellEval::default();
        for (ci, r) in self.regions.iter().enumerate() {
            let geo = &mesh.geometry[ci];
            let o = self.offsets[ci];
            let nodal: Vec<C64> = self.basis.nodes.iter().map(|xi| chi(&geo.to_physical(xi))).collect();
            match r {
                Region::Insulator => x[o..o + n].copy_from_slice(&nodal),
                Region::Conductor => {
                    for (i, xi) in self.basis.nodes.iter().enumerate() {
                        self.eval_reference(mesh, ci, xi, &mut e);
                        let mut g = CVec3::zeros();
                        for j in 0..n {
                            g += e.grads[j].map(|t| nodal[j] * t);
                        }
                        for c in 0..3 {
                            x[o + c * n + i] = g[c];
                        }
                    }
                }
            }
        }
        x
    }

    /// Rank of the trace of the enriched space on each interface face of an
    /// insulator cell, against the dimension of degree-`m+1` polynomials there.
    pub fn trace_ranks(&self, mesh: &Mesh, cell: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for lf in 0..4 {
            let f = mesh.cell_faces[cell][lf];
            if mesh.faces[f].kind != FaceKind::Interface || self.regions[cell] != Region::Insulator {
                continue;
            }
            let nodes: Vec<usize> = (0..self.enriched.len()).filter(|&i| self.enriched.node_on_face(i, lf)).collect();
            let nl = self.n_local_scalar(cell);
            let mut mat = DMatrix::<f64>::zeros(nodes.len(), nl);
            let mut e = CellEval::default();
            for (r, &i) in nodes.iter().enumerate() {
                self.eval_reference(mesh, cell, &self.enriched.nodes[i], &mut e);
                for c in 0..nl {
                    mat[(r, c)] = e.values[c];
                }
            }
            out.push((mat.rank(1e-10), dim_p2(self.degree + 1)));
        }
        out
    }
}

pub fn unit(c: usize) -> Point {
    let mut u = Point::zeros();
    u[c] = 1.0;
    u
}

/// Dimension of the conductor vector space per cell.
pub fn conductor_dofs(m: usize) -> usize {
    3 * dim_p(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn enrichment_covers_every_pattern() {
        let basis = LagrangeBasis::new(2);
        let enriched = LagrangeBasis::new(3);
        let gv = [10, 3, 7, 1];
        for mask in 1u32..16 {
            let gamma: Vec<usize> = (0..4).filter(|f| mask & (1 << f) != 0).collect();
            let edges = choose_edges(&gamma, &gv);
            let sel: Vec<usize> =
                (0..enriched.len()).filter(|&i| edges.iter().any(|e| enriched.node_on_edge(i, e[0], e[1]))).collect();
            if gamma.len() == 4 {
                assert!(!independent(&basis, &enriched, &sel));
                continue;
            }
            assert!(independent(&basis, &enriched, &sel), "mask {mask}");
            for &f in &gamma {
                let fv = LOCAL_FACES[f];
                assert!(edges.iter().any(|e| fv.contains(&e[0]) && fv.contains(&e[1])));
            }
        }
    }

    #[test]
    fn dof_counts() {
        let m = fixtures::two_tets();
        let s = build_dg_space(&m, 1, false).unwrap();
        assert_eq!(s.ndofs[0], 12);
        assert_eq!(s.ndofs[1], 4 + 3);
        let s = build_dg_space(&m, 2, true).unwrap();
        assert_eq!(s.ndofs[1], 10 + 4);
        assert_eq!(s.n_dofs, 30 + 14 + 1);
        assert!(matches!(build_dg_space(&m, 0, false), Err(SpaceError::ZeroDegree)));
    }
}
