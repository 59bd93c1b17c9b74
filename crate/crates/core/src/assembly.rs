//! Averages, jumps and the global complex system of the hybrid DG scheme.
//!
//! Row `a`, column `b` of the matrix holds `A(φ_b, φ_a)`; the forms are
//! bilinear, so the matrix is complex symmetric.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::cohomology::HarmonicField;
use crate::fespace::{unit, CVec3, CellEval, DgSpace, C64};
use crate::mesh::{FaceKind, Mesh, Point, Region};
use crate::quadrature::{quadrature, EntityKind, QuadratureRule};
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("material '{0}' has no {1}")]
    MissingMaterial(String, &'static str),
    #[error("{0} must be positive (got {1})")]
    NonPositive(String, f64),
    #[error("k slot is {0} but the cohomology field is {1}")]
    KFlag(&'static str, &'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Materials {
    pub omega: f64,
    pub mu0: f64,
    /// Per conductor material; `None` key entries fall back to the defaults.
    pub mu: BTreeMap<String, f64>,
    pub sigma: BTreeMap<String, f64>,
    pub default_mu: Option<f64>,
    pub default_sigma: Option<f64>,
}

impl Materials {
    pub fn uniform(omega: f64, mu: f64, mu0: f64, sigma: f64) -> Materials {
        Materials {
            omega,
            mu0,
            mu: BTreeMap::new(),
            sigma: BTreeMap::new(),
            default_mu: Some(mu),
            default_sigma: Some(sigma),
        }
    }

    pub fn mu_of(&self, key: &str) -> Result<f64, AssemblyError> {
        self.mu
            .get(key)
            .copied()
            .or(self.default_mu)
            .ok_or_else(|| AssemblyError::MissingMaterial(key.into(), "mu"))
    }

    pub fn sigma_of(&self, key: &str) -> Result<f64, AssemblyError> {
        self.sigma
            .get(key)
            .copied()
            .or(self.default_sigma)
            .ok_or_else(|| AssemblyError::MissingMaterial(key.into(), "sigma"))
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        let mut all = vec![("omega".to_string(), self.omega), ("mu0".to_string(), self.mu0)];
        all.extend(self.default_mu.map(|v| ("mu".to_string(), v)));
        all.extend(self.default_sigma.map(|v| ("sigma".to_string(), v)));
        all.extend(self.mu.iter().map(|(k, v)| (format!("mu.{k}"), *v)));
        all.extend(self.sigma.iter().map(|(k, v)| (format!("sigma.{k}"), *v)));
        for (k, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AssemblyError::NonPositive(k, v));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalties {
    pub a_c: f64,
    pub a_i: f64,
    pub alpha: f64,
}

impl Penalties {
    /// `10 (m + 1)²` for all three.
    pub fn default_for(m: usize) -> Penalties {
        let a = 10.0 * ((m + 1) * (m + 1)) as f64;
        Penalties { a_c: a, a_i: a, alpha: a }
    }

    pub fn scaled(self, s: f64) -> Penalties {
        Penalties { a_c: self.a_c * s, a_i: self.a_i * s, alpha: self.alpha * s }
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        for (k, v) in [("a_c", self.a_c), ("a_i", self.a_i), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AssemblyError::NonPositive(k.into(), v));
            }
        }
        Ok(())
    }
}

/// `s_F` for conductor and interface faces (zero elsewhere) and `s_e` per
/// interface edge.
pub fn penalty_fields(mesh: &Mesh, materials: &Materials) -> Result<(Vec<f64>, Vec<f64>), AssemblyError> {
    let sigma = |c: usize| materials.sigma_of(&mesh.cells[c].material);
    let mut sf = vec![0.0; mesh.faces.len()];
    for (i, f) in mesh.faces.iter().enumerate() {
        sf[i] = match f.kind {
            FaceKind::InteriorConductor => sigma(f.owner)?.min(sigma(f.neighbor.unwrap().0)?),
            FaceKind::Interface => sigma(f.owner)?,
            _ => 0.0,
        };
    }
    let mut se = Vec::with_capacity(mesh.interface_edges.len());
    for e in &mesh.interface_edges {
        se.push(sigma(mesh.faces[e.faces[0]].owner)?.min(sigma(mesh.faces[e.faces[1]].owner)?));
    }
    Ok((sf, se))
}

/// Everything the forms need, resolved per cell.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub mesh: &'a Mesh,
    pub space: &'a DgSpace,
    pub rho: &'a HarmonicField,
    pub omega: f64,
    pub mu0: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub s_face: Vec<f64>,
    pub s_edge: Vec<f64>,
    pub pen: Penalties,
    pub qdeg: usize,
}

impl<'a> Problem<'a> {
    pub fn new(
        mesh: &'a Mesh,
        space: &'a DgSpace,
        materials: &Materials,
        rho: &'a HarmonicField,
        pen: Penalties,
    ) -> Result<Problem<'a>, AssemblyError> {
        materials.validate()?;
        pen.validate()?;
        match (space.k_dof.is_some(), rho.is_zero()) {
            (true, true) => return Err(AssemblyError::KFlag("present", "zero")),
            (false, false) => return Err(AssemblyError::KFlag("absent", "nonzero")),
            _ => {}
        }
        let mut mu = vec![0.0; mesh.n_cells()];
        let mut sigma = vec![0.0; mesh.n_cells()];
        for (i, c) in mesh.cells.iter().enumerate() {
            if c.region == Region::Conductor {
                mu[i] = materials.mu_of(&c.material)?;
                sigma[i] = materials.sigma_of(&c.material)?;
            }
        }
        let (s_face, s_edge) = penalty_fields(mesh, materials)?;
        Ok(Problem {
            mesh,
            space,
            rho,
            omega: materials.omega,
            mu0: materials.mu0,
            mu,
            sigma,
            s_face,
            s_edge,
            pen,
            qdeg: 2 * space.degree + 2,
        })
    }

    pub fn n(&self) -> usize {
        self.space.n_dofs
    }

    pub fn has_k(&self, cell: usize) -> bool {
        self.space.k_dof.is_some() && self.rho.rho[cell].norm() > 0.0
    }

    pub fn rule(&self, kind: EntityKind, extra: usize) -> QuadratureRule {
        quadrature(kind, self.qdeg + extra).expect("supported quadrature degree")
    }
}

/// Contribution of one dof to the jump and average at a quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct Trace {
    pub dof: usize,
    pub jump: Point,
    pub avg: Point,
}

/// `v_K × n_K + w × n_{K'}`: conductor jump, with `w` either the neighbour's
/// conductor trace or `∇φ + mρ` from the insulator side of an interface face.
pub fn conductor_jump(v: &CVec3, n: &Point, w: &CVec3, n_other: &Point) -> CVec3 {
    let nk = n.map(C64::from);
    let no = n_other.map(C64::from);
    v.cross(&nk) + w.cross(&no)
}

/// `φ_K n_K + φ_{K'} n_{K'}`; pass zero for the missing side on the boundary.
pub fn scalar_jump(phi: C64, n: &Point, phi_other: C64, n_other: &Point) -> CVec3 {
    n.map(|t| phi * t) + n_other.map(|t| phi_other * t)
}

/// `φ_{K_e} t_e + φ_{K'_e} t'_e`.
pub fn edge_jump(phi: C64, t: &Point, phi_other: C64, t_other: &Point) -> CVec3 {
    scalar_jump(phi, t, phi_other, t_other)
}

/// `(a + b) / 2`, or `a` alone on one-sided faces.
pub fn average(a: &CVec3, b: Option<&CVec3>) -> CVec3 {
    match b {
        Some(b) => (a + b) * C64::from(0.5),
        None => *a,
    }
}

/// Physical points of a rule on face `f`.
pub fn face_points(mesh: &Mesh, f: usize, rule: &QuadratureRule) -> Vec<(Point, f64)> {
    let p = mesh.face_points(f);
    let jac = 2.0 * mesh.faces[f].area;
    (0..rule.len())
        .map(|q| {
            let l = rule.point(q);
            (p[0] * l[0] + p[1] * l[1] + p[2] * l[2], rule.weights[q] * jac)
        })
        .collect()
}

pub fn edge_points(mesh: &Mesh, e: usize, rule: &QuadratureRule) -> Vec<(Point, f64)> {
    let ed = &mesh.interface_edges[e];
    let a = mesh.vertices[ed.vertices[0]];
    let b = mesh.vertices[ed.vertices[1]];
    (0..rule.len())
        .map(|q| {
            let l = rule.point(q);
            (a * l[0] + b * l[1], rule.weights[q] * ed.length)
        })
        .collect()
}

impl Problem<'_> {
    fn push_conductor_side(&self, out: &mut Vec<Trace>, cell: usize, x: &Point, n: &Point, sign: f64, w: f64, ev: &mut CellEval) {
        self.space.eval(self.mesh, cell, x, ev);
        let nb = self.space.n_scalar();
        let o = self.space.offsets[cell];
        let s_inv = w / self.sigma[cell];
        for c in 0..3 {
            let ec = unit(c);
            for i in 0..nb {
                out.push(Trace {
                    dof: o + c * nb + i,
                    jump: ec.cross(n) * (ev.values[i] * sign),
                    avg: ev.grads[i].cross(&ec) * s_inv,
                });
            }
        }
    }

    /// Traces on a conductor interior or interface face at `x`.
    pub fn conductor_face_traces(&self, f: usize, x: &Point, ev: &mut CellEval) -> Vec<Trace> {
        let face = &self.mesh.faces[f];
        let n = face.normal;
        let mut out = Vec::new();
        match face.kind {
            FaceKind::InteriorConductor => {
                self.push_conductor_side(&mut out, face.owner, x, &n, 1.0, 0.5, ev);
                self.push_conductor_side(&mut out, face.neighbor.unwrap().0, x, &n, -1.0, 0.5, ev);
            }
            FaceKind::Interface => {
                self.push_conductor_side(&mut out, face.owner, x, &n, 1.0, 1.0, ev);
                let ins = face.neighbor.unwrap().0;
                self.space.eval(self.mesh, ins, x, ev);
                let o = self.space.offsets[ins];
                for (j, g) in ev.grads.iter().enumerate() {
                    out.push(Trace { dof: o + j, jump: -g.cross(&n), avg: Point::zeros() });
                }
                if self.has_k(ins) {
                    out.push(Trace {
                        dof: self.space.k_dof.unwrap(),
                        jump: -self.rho.rho[ins].cross(&n),
                        avg: Point::zeros(),
                    });
                }
            }
            _ => panic!("face {f} is not a conductor face"),
        }
        out
    }

    /// Traces on an interior insulator or outer face: `jump` is the `[φ n]`
    /// contribution, `avg` the `{∇φ + mρ}` contribution.
    pub fn insulator_face_traces(&self, f: usize, x: &Point, ev: &mut CellEval) -> Vec<Trace> {
        let face = &self.mesh.faces[f];
        let n = face.normal;
        let mut out = Vec::new();
        let sides: Vec<(usize, f64)> = match face.neighbor {
            Some((nb, _)) => vec![(face.owner, 1.0), (nb, -1.0)],
            None => vec![(face.owner, 1.0)],
        };
        let w = 1.0 / sides.len() as f64;
        let mut rho_avg = Point::zeros();
        let mut with_k = false;
        for &(cell, sign) in &sides {
            self.space.eval(self.mesh, cell, x, ev);
            let o = self.space.offsets[cell];
            for j in 0..ev.values.len() {
                out.push(Trace { dof: o + j, jump: n * (ev.values[j] * sign), avg: ev.grads[j] * w });
            }
            rho_avg += self.rho.rho[cell] * w;
            with_k |= self.has_k(cell);
        }
        if with_k {
            out.push(Trace { dof: self.space.k_dof.unwrap(), jump: Point::zeros(), avg: rho_avg });
        }
        out
    }

    /// Traces on an interface edge: `jump` is the `[φ t]` contribution, `avg`
    /// the `{σ⁻¹ curl v}` contribution.
    pub fn edge_traces(&self, e: usize, x: &Point, ev: &mut CellEval) -> Vec<Trace> {
        let ed = &self.mesh.interface_edges[e];
        let nb = self.space.n_scalar();
        let mut out = Vec::new();
        for side in 0..2 {
            let face = &self.mesh.faces[ed.faces[side]];
            let cond = face.owner;
            self.space.eval(self.mesh, cond, x, ev);
            let o = self.space.offsets[cond];
            let s_inv = 0.5 / self.sigma[cond];
            for c in 0..3 {
                let ec = unit(c);
                for i in 0..nb {
                    out.push(Trace { dof: o + c * nb + i, jump: Point::zeros(), avg: ev.grads[i].cross(&ec) * s_inv });
                }
            }
            let ins = face.neighbor.unwrap().0;
            self.space.eval(self.mesh, ins, x, ev);
            let o = self.space.offsets[ins];
            for j in 0..ev.values.len() {
                out.push(Trace { dof: o + j, jump: ed.tangents[side] * ev.values[j], avg: Point::zeros() });
            }
        }
        out
    }
}

/// Dense local matrix over a small set of global dofs.
pub struct Local {
    pub dofs: Vec<usize>,
    pub mat: Vec<C64>,
}

impl Local {
    pub fn new(traces: &[Trace]) -> (Local, Vec<usize>) {
        let mut dofs: Vec<usize> = traces.iter().map(|t| t.dof).collect();
        dofs.sort_unstable();
        dofs.dedup();
        let idx = traces.iter().map(|t| dofs.binary_search(&t.dof).unwrap()).collect();
        let n = dofs.len();
        (Local { dofs, mat: vec![C64::new(0.0, 0.0); n * n] }, idx)
    }

    pub fn with_dofs(dofs: Vec<usize>) -> Local {
        let n = dofs.len();
        Local { dofs, mat: vec![C64::new(0.0, 0.0); n * n] }
    }

    #[inline]
    pub fn add(&mut self, a: usize, b: usize, v: C64) {
        let n = self.dofs.len();
        self.mat[a * n + b] += v;
    }

    pub fn emit(&self, trip: &mut Vec<(usize, usize, C64)>) {
        let n = self.dofs.len();
        for a in 0..n {
            for b in 0..n {
                let v = self.mat[a * n + b];
                if v != C64::new(0.0, 0.0) {
                    trip.push((self.dofs[a], self.dofs[b], v));
                }
            }
        }
    }
}

fn ci(im: f64) -> C64 {
    Complex64::new(0.0, im)
}

/// The assembled matrix and load.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub matrix: CscMatrix,
    pub rhs: Vec<C64>,
    pub has_k: bool,
}

impl AssembledSystem {
    pub fn n(&self) -> usize {
        self.matrix.n
    }
}

/// Shape functions on the cells of one region at the points of a volume rule.
struct Volume<'p, 'm> {
    p: &'p Problem<'m>,
    rule: QuadratureRule,
    tab: crate::fespace::Tabulation,
}

impl<'p, 'm> Volume<'p, 'm> {
    fn new(p: &'p Problem<'m>, extra: usize) -> Volume<'p, 'm> {
        let rule = p.rule(EntityKind::Tetrahedron, extra);
        let tab = p.space.tabulate(&rule);
        Volume { p, rule, tab }
    }

    /// (physical point, weight) and the shape functions at each point.
    fn each(&self, cell: usize, mut f: impl FnMut(&Point, f64, &CellEval)) {
        let geo = &self.p.mesh.geometry[cell];
        let mut ev = CellEval::default();
        for q in 0..self.rule.len() {
            let r = self.rule.reference(q);
            let xi = Point::new(r[0], r[1], r[2]);
            self.p.space.eval_table(self.p.mesh, cell, &self.tab, q, &mut ev);
            f(&geo.to_physical(&xi), self.rule.weights[q] * geo.det, &ev);
        }
    }
}

/// Which symmetric form to assemble with the shared trace machinery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// The discrete operator.
    Operator,
    /// Gram matrix of the squared DG norm.
    Norm,
    /// Gram matrix of the average terms that the star norm adds.
    StarExtra,
}

pub fn assemble_ah(p: &Problem) -> CscMatrix {
    assemble_form(p, Form::Operator)
}

pub fn assemble_form(p: &Problem, form: Form) -> CscMatrix {
    let mut trip: Vec<(usize, usize, C64)> = Vec::new();
    let mesh = p.mesh;
    let sp = p.space;
    let nb = sp.n_scalar();
    let vol = Volume::new(p, 0);
    let (rot, star) = match form {
        Form::Operator => (ci(1.0), 0.0),
        Form::Norm => (C64::from(1.0), 0.0),
        Form::StarExtra => (C64::from(0.0), 1.0),
    };
    let op = if form == Form::Operator { 1.0 } else { 0.0 };

    if form != Form::StarExtra {
        for cell in 0..mesh.n_cells() {
            let o = sp.offsets[cell];
            match mesh.cells[cell].region {
                Region::Conductor => {
                    let mut loc = Local::with_dofs((o..o + 3 * nb).collect());
                    let mass = rot * (p.omega * p.mu[cell]);
                    let s_inv = 1.0 / p.sigma[cell];
                    let mut curls = vec![Point::zeros(); 3 * nb];
                    vol.each(cell, |_, w, ev| {
                        for c in 0..3 {
                            for i in 0..nb {
                                curls[c * nb + i] = ev.grads[i].cross(&unit(c));
                            }
                        }
                        for a in 0..3 * nb {
                            for b in 0..3 * nb {
                                let mut v = C64::from(w * s_inv * curls[a].dot(&curls[b]));
                                if a / nb == b / nb {
                                    v += mass * (w * ev.values[a % nb] * ev.values[b % nb]);
                                }
                                loc.add(a, b, v);
                            }
                        }
                    });
                    loc.emit(&mut trip);
                }
                Region::Insulator => {
                    let nl = sp.ndofs[cell];
                    let mut dofs: Vec<usize> = (o..o + nl).collect();
                    let k = p.has_k(cell);
                    if k {
                        dofs.push(sp.k_dof.unwrap());
                    }
                    let mut loc = Local::with_dofs(dofs);
                    let coef = rot * (p.omega * p.mu0);
                    let rho = p.rho.rho[cell];
                    let mut g = Vec::new();
                    vol.each(cell, |_, w, ev| {
                        g.clear();
                        g.extend_from_slice(&ev.grads);
                        if k {
                            g.push(rho);
                        }
                        for a in 0..g.len() {
                            for b in 0..g.len() {
                                loc.add(a, b, coef * (w * g[a].dot(&g[b])));
                            }
                        }
                    });
                    loc.emit(&mut trip);
                }
            }
        }
    }

    let frule = p.rule(EntityKind::Triangle, 0);
    let mut ev = CellEval::default();
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        let h = face.diameter;
        let (conductor, pen, cons, avg_w) =
            match face.kind {
                FaceKind::InteriorConductor | FaceKind::Interface => {
                    let s = p.s_face[f];
                    let pen = match form {
                        Form::Operator => p.pen.a_c / (s * h),
                        Form::Norm => 1.0 / (s * h),
                        Form::StarExtra => 0.0,
                    };
                    (true, pen, C64::from(op), star * s * h)
                }
                FaceKind::InteriorInsulator | FaceKind::Outer if mesh.is_sigma(f) || face.kind == FaceKind::InteriorInsulator => {
                    let pen = match form {
                        Form::Operator => p.pen.a_i / (p.omega * p.mu0 * h),
                        Form::Norm => p.omega * p.mu0 / h,
                        Form::StarExtra => 0.0,
                    };
                    (false, pen, ci(-p.omega * p.mu0) * op, star * h)
                }
                _ => continue,
            };
        let pts = face_points(mesh, f, &frule);
        let cache: Vec<(Vec<Trace>, f64)> = pts
            .iter()
            .map(|(x, w)| {
                let t = if conductor { p.conductor_face_traces(f, x, &mut ev) } else { p.insulator_face_traces(f, x, &mut ev) };
                (t, *w)
            })
            .collect();
        let (mut loc, idx) = Local::new(&cache[0].0);
        for (tr, w) in &cache {
            for (ta, &a) in tr.iter().zip(&idx) {
                for (tb, &b) in tr.iter().zip(&idx) {
                    let sym = tb.avg.dot(&ta.jump) + ta.avg.dot(&tb.jump);
                    let v = C64::from(pen * ta.jump.dot(&tb.jump) + avg_w * ta.avg.dot(&tb.avg)) + cons * sym;
                    loc.add(a, b, v * *w);
                }
            }
        }
        loc.emit(&mut trip);
    }

    let erule = p.rule(EntityKind::Segment, 0);
    for e in 0..mesh.interface_edges.len() {
        let ed = &mesh.interface_edges[e];
        let s = p.s_edge[e];
        let h2 = ed.length * ed.length;
        let pen = match form {
            Form::Operator => p.pen.alpha / (s * h2),
            Form::Norm => 1.0 / (s * h2),
            Form::StarExtra => 0.0,
        };
        let avg_w = star * s * h2;
        let pts = edge_points(mesh, e, &erule);
        let cache: Vec<(Vec<Trace>, f64)> = pts.iter().map(|(x, w)| (p.edge_traces(e, x, &mut ev), *w)).collect();
        let (mut loc, idx) = Local::new(&cache[0].0);
        for (tr, w) in &cache {
            for (ta, &a) in tr.iter().zip(&idx) {
                for (tb, &b) in tr.iter().zip(&idx) {
                    let v = -op * (tb.avg.dot(&ta.jump) + ta.avg.dot(&tb.jump))
                        + pen * ta.jump.dot(&tb.jump)
                        + avg_w * ta.avg.dot(&tb.avg);
                    loc.add(a, b, C64::from(w * v));
                }
            }
        }
        loc.emit(&mut trip);
    }

    CscMatrix::from_triplets(p.n(), &trip)
}

/// Physical load for an applied current density `j` (evaluated per cell).
pub fn assemble_lh(p: &Problem, j: &dyn Fn(usize, &Point) -> CVec3) -> Vec<C64> {
    let mesh = p.mesh;
    let sp = p.space;
    let nb = sp.n_scalar();
    let mut b = vec![C64::new(0.0, 0.0); p.n()];
    let vol = Volume::new(p, 2);
    for cell in 0..mesh.n_cells() {
        if mesh.cells[cell].region != Region::Conductor {
            continue;
        }
        let o = sp.offsets[cell];
        let s_inv = 1.0 / p.sigma[cell];
        vol.each(cell, |x, w, ev| {
            let jx = j(cell, x) * C64::from(s_inv * w);
            for c in 0..3 {
                for i in 0..nb {
                    let curl = ev.grads[i].cross(&unit(c)).map(C64::from);
                    b[o + c * nb + i] += jx.dot(&curl);
                }
            }
        });
    }
    let frule = p.rule(EntityKind::Triangle, 2);
    let mut ev = CellEval::default();
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        if !matches!(face.kind, FaceKind::InteriorConductor | FaceKind::Interface) {
            continue;
        }
        for (x, w) in face_points(mesh, f, &frule) {
            let mut avg = j(face.owner, &x) / C64::from(p.sigma[face.owner]);
            if face.kind == FaceKind::InteriorConductor {
                let nb_cell = face.neighbor.unwrap().0;
                avg = (avg + j(nb_cell, &x) / C64::from(p.sigma[nb_cell])) * C64::from(0.5);
            }
            for t in p.conductor_face_traces(f, &x, &mut ev) {
                b[t.dof] += avg.dot(&t.jump.map(C64::from)) * w;
            }
        }
    }
    let erule = p.rule(EntityKind::Segment, 2);
    for e in 0..mesh.interface_edges.len() {
        let ed = &mesh.interface_edges[e];
        let c0 = mesh.faces[ed.faces[0]].owner;
        let c1 = mesh.faces[ed.faces[1]].owner;
        for (x, w) in edge_points(mesh, e, &erule) {
            let avg = (j(c0, &x) / C64::from(p.sigma[c0]) + j(c1, &x) / C64::from(p.sigma[c1])) * C64::from(0.5);
            for t in p.edge_traces(e, &x, &mut ev) {
                b[t.dof] -= avg.dot(&t.jump.map(C64::from)) * w;
            }
        }
    }
    b
}

pub type VecField<'a> = Box<dyn Fn(usize, &Point) -> CVec3 + 'a>;
pub type ScalarField<'a> = Box<dyn Fn(usize, &Point) -> C64 + 'a>;

/// Data for manufactured solutions that do not solve the homogeneous model.
/// Cell callbacks receive a cell id, face callbacks a face id.
#[derive(Default)]
pub struct SourceBundle<'a> {
    /// Tested against `v` in the conductor.
    pub f_c: Option<VecField<'a>>,
    /// Tested against `φ` in the insulator.
    pub f_i: Option<ScalarField<'a>>,
    /// Tested against the insulator trace on interface faces.
    pub gamma_flux: Option<ScalarField<'a>>,
    /// Tested against `{φ}` on interior insulator faces.
    pub face_flux: Option<ScalarField<'a>>,
    /// Dirichlet trace on the outer boundary, loaded through the penalty and
    /// consistency terms.
    pub sigma_trace: Option<ScalarField<'a>>,
    /// Load on the `k` slot.
    pub g: C64,
}

pub fn assemble_generalized_load(p: &Problem, src: &SourceBundle) -> Vec<C64> {
    let mesh = p.mesh;
    let sp = p.space;
    let nb = sp.n_scalar();
    let mut b = vec![C64::new(0.0, 0.0); p.n()];
    let vol = Volume::new(p, 2);
    for cell in 0..mesh.n_cells() {
        let o = sp.offsets[cell];
        match mesh.cells[cell].region {
            Region::Conductor => {
                if let Some(fc) = &src.f_c {
                    vol.each(cell, |x, w, ev| {
                        let f = fc(cell, x);
                        for c in 0..3 {
                            for i in 0..nb {
                                b[o + c * nb + i] += f[c] * (w * ev.values[i]);
                            }
                        }
                    });
                }
            }
            Region::Insulator => {
                if let Some(fi) = &src.f_i {
                    vol.each(cell, |x, w, ev| {
                        let f = fi(cell, x);
                        for (j, v) in ev.values.iter().enumerate() {
                            b[o + j] += f * (w * v);
                        }
                    });
                }
            }
        }
    }
    let frule = p.rule(EntityKind::Triangle, 2);
    let mut ev = CellEval::default();
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        let data: Option<&ScalarField> = match face.kind {
            FaceKind::Interface => src.gamma_flux.as_ref(),
            FaceKind::InteriorInsulator => src.face_flux.as_ref(),
            FaceKind::Outer if mesh.is_sigma(f) => src.sigma_trace.as_ref(),
            _ => None,
        };
        let Some(data) = data else { continue };
        for (x, w) in face_points(mesh, f, &frule) {
            let d = data(f, &x);
            match face.kind {
                FaceKind::Interface => {
                    let ins = face.neighbor.unwrap().0;
                    sp.eval(mesh, ins, &x, &mut ev);
                    let o = sp.offsets[ins];
                    for (j, v) in ev.values.iter().enumerate() {
                        b[o + j] += d * (w * v);
                    }
                }
                FaceKind::InteriorInsulator => {
                    for cell in [face.owner, face.neighbor.unwrap().0] {
                        sp.eval(mesh, cell, &x, &mut ev);
                        let o = sp.offsets[cell];
                        for (j, v) in ev.values.iter().enumerate() {
                            b[o + j] += d * (0.5 * w * v);
                        }
                    }
                }
                _ => {
                    let pen = p.pen.a_i / (p.omega * p.mu0 * face.diameter);
                    let cons = ci(-p.omega * p.mu0);
                    for t in p.insulator_face_traces(f, &x, &mut ev) {
                        let jump_dot = t.jump.dot(&face.normal);
                        let avg_dot = t.avg.dot(&face.normal);
                        b[t.dof] += d * w * (C64::from(pen * jump_dot) + cons * avg_dot);
                    }
                }
            }
        }
    }
    if let Some(k) = sp.k_dof {
        b[k] += src.g;
    }
    b
}

/// Matrix and physical load together.
pub fn assemble_system(p: &Problem, j: &dyn Fn(usize, &Point) -> CVec3) -> AssembledSystem {
    AssembledSystem { matrix: assemble_ah(p), rhs: assemble_lh(p, j), has_k: p.space.k_dof.is_some() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_helpers() {
        let c = CVec3::new(C64::new(1.0, 0.0), C64::new(2.0, 1.0), C64::new(-1.0, 0.0));
        let n = Point::new(0.0, 0.0, 1.0);
        assert!(conductor_jump(&c, &n, &c, &-n).norm() == 0.0);
        assert_eq!(average(&c, Some(&c)), c);
        let j = scalar_jump(C64::from(1.0), &n, C64::from(0.0), &Point::zeros());
        assert_eq!(j, n.map(C64::from));
        let t = Point::x();
        let j = edge_jump(C64::from(1.0), &t, C64::from(0.0), &-t);
        assert_eq!(j, t.map(C64::from));
    }

    #[test]
    fn s_fields() {
        let m = crate::fixtures::cube_fixture(1);
        let mut mat = Materials::uniform(1.0, 1.0, 1.0, 5.0);
        let (sf, se) = penalty_fields(&m, &mat).unwrap();
        for (i, f) in m.faces.iter().enumerate() {
            if f.kind == FaceKind::Interface {
                assert_eq!(sf[i], 5.0);
            }
        }
        assert!(se.iter().all(|&s| s == 5.0));
        mat.default_sigma = None;
        assert!(penalty_fields(&m, &mat).is_err());
    }
}
