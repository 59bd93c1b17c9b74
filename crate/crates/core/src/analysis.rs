//! DG norms, error measurement and sampled checks of stability properties.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::assembly::{edge_points, face_points, Problem};
use crate::basis::LagrangeBasis;
use crate::fespace::{unit, CVec3, CellEval, C64};
use crate::mesh::{FaceKind, Mesh, Point, Region, LOCAL_FACES};
use crate::mms::ExactSolution;
use crate::quadrature::{quadrature, EntityKind};
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least two levels")]
    TooFewLevels,
    #[error("mesh sizes must decrease strictly")]
    NotDecreasing,
    #[error("errors must be positive (got {0})")]
    NonPositive(f64),
}

/// Evaluates a (possibly broken) field triple cellwise.
pub trait Field {
    /// Value and curl of the conductor field.
    fn conductor(&self, cell: usize, x: &Point, scratch: &mut CellEval) -> (CVec3, CVec3);
    /// Value and `∇φ + mρ` of the insulator field.
    fn insulator(&self, cell: usize, x: &Point, scratch: &mut CellEval) -> (C64, CVec3);
}

/// A coefficient vector of the discrete space.
pub struct Discrete<'a> {
    pub p: &'a Problem<'a>,
    pub coeffs: &'a [C64],
}

impl Field for Discrete<'_> {
    fn conductor(&self, cell: usize, x: &Point, e: &mut CellEval) -> (CVec3, CVec3) {
        self.p.space.eval(self.p.mesh, cell, x, e);
        self.p.space.conductor_from_eval(cell, self.coeffs, e)
    }

    fn insulator(&self, cell: usize, x: &Point, e: &mut CellEval) -> (C64, CVec3) {
        self.p.space.eval(self.p.mesh, cell, x, e);
        let (v, g) = self.p.space.insulator_from_eval(cell, self.coeffs, e);
        let m = self.p.space.k_value(self.coeffs);
        (v, g + self.p.rho.rho[cell].map(|t| m * t))
    }
}

pub struct Exact<'a> {
    pub p: &'a Problem<'a>,
    pub exact: &'a ExactSolution<'a>,
}

impl Field for Exact<'_> {
    fn conductor(&self, cell: usize, x: &Point, _: &mut CellEval) -> (CVec3, CVec3) {
        let h = (self.exact.h)(cell, x);
        (h.h, h.curl)
    }

    fn insulator(&self, cell: usize, x: &Point, _: &mut CellEval) -> (C64, CVec3) {
        let v = (self.exact.psi)(cell, x);
        (v.psi, self.exact.w(self.p.rho, cell, x))
    }
}

pub struct Difference<A, B>(pub A, pub B);

impl<A: Field, B: Field> Field for Difference<A, B> {
    fn conductor(&self, cell: usize, x: &Point, e: &mut CellEval) -> (CVec3, CVec3) {
        let (a, ca) = self.0.conductor(cell, x, e);
        let (b, cb) = self.1.conductor(cell, x, e);
        (a - b, ca - cb)
    }

    fn insulator(&self, cell: usize, x: &Point, e: &mut CellEval) -> (C64, CVec3) {
        let (a, ga) = self.0.insulator(cell, x, e);
        let (b, gb) = self.1.insulator(cell, x, e);
        (a - b, ga - gb)
    }
}

/// Components of the DG norm (and, when requested, the star norm).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormReport {
    pub l2_conductor: f64,
    pub curl: f64,
    pub grad_insulator: f64,
    pub jump_conductor: f64,
    pub jump_insulator: f64,
    pub jump_edge: f64,
    pub avg_conductor: f64,
    pub avg_edge: f64,
    pub avg_insulator: f64,
}

impl NormReport {
    pub fn components(&self) -> [f64; 6] {
        [self.l2_conductor, self.curl, self.grad_insulator, self.jump_conductor, self.jump_insulator, self.jump_edge]
    }

    pub fn star_components(&self) -> [f64; 3] {
        [self.avg_conductor, self.avg_edge, self.avg_insulator]
    }

    pub fn total(&self) -> f64 {
        self.components().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn star_total(&self) -> f64 {
        let t = self.total();
        (t * t + self.star_components().iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    pub fn volume(&self) -> f64 {
        (self.l2_conductor.powi(2) + self.curl.powi(2) + self.grad_insulator.powi(2)).sqrt()
    }

    pub fn jumps(&self) -> f64 {
        (self.jump_conductor.powi(2) + self.jump_insulator.powi(2) + self.jump_edge.powi(2)).sqrt()
    }
}

/// DG (and star) norm of a field by quadrature of degree `2m + 2 + extra`.
pub fn norm_of(p: &Problem, field: &dyn Field, extra: usize) -> NormReport {
    let mesh = p.mesh;
    let mut sq = [0.0f64; 9];
    let mut e = CellEval::default();
    let vrule = p.rule(EntityKind::Tetrahedron, extra);
    for cell in 0..mesh.n_cells() {
        let geo = &mesh.geometry[cell];
        for q in 0..vrule.len() {
            let r = vrule.reference(q);
            let x = geo.to_physical(&Point::new(r[0], r[1], r[2]));
            let w = vrule.weights[q] * geo.det;
            match mesh.cells[cell].region {
                Region::Conductor => {
                    let (v, c) = field.conductor(cell, &x, &mut e);
                    sq[0] += w * p.omega * p.mu[cell] * v.norm_squared();
                    sq[1] += w / p.sigma[cell] * c.norm_squared();
                }
                Region::Insulator => {
                    let (_, g) = field.insulator(cell, &x, &mut e);
                    sq[2] += w * p.omega * p.mu0 * g.norm_squared();
                }
            }
        }
    }
    let frule = p.rule(EntityKind::Triangle, extra);
    for (f, face) in mesh.faces.iter().enumerate() {
        let h = face.diameter;
        let n = face.normal.map(C64::from);
        match face.kind {
            FaceKind::InteriorConductor | FaceKind::Interface => {
                let s = p.s_face[f];
                let other = face.neighbor.unwrap().0;
                for (x, w) in face_points(mesh, f, &frule) {
                    let (v, c) = field.conductor(face.owner, &x, &mut e);
                    let (jump, avg) = if face.kind == FaceKind::Interface {
                        let (_, g) = field.insulator(other, &x, &mut e);
                        (v.cross(&n) - g.cross(&n), c / C64::from(p.sigma[face.owner]))
                    } else {
                        let (v2, c2) = field.conductor(other, &x, &mut e);
                        let avg = (c / C64::from(p.sigma[face.owner]) + c2 / C64::from(p.sigma[other])) * C64::from(0.5);
                        ((v - v2).cross(&n), avg)
                    };
                    sq[3] += w / (s * h) * jump.norm_squared();
                    sq[6] += w * s * h * avg.norm_squared();
                }
            }
            FaceKind::InteriorInsulator | FaceKind::Outer if face.kind == FaceKind::InteriorInsulator || mesh.is_sigma(f) => {
                for (x, w) in face_points(mesh, f, &frule) {
                    let (a, ga) = field.insulator(face.owner, &x, &mut e);
                    let (jump, avg) = match face.neighbor {
                        Some((o, _)) => {
                            let (b, gb) = field.insulator(o, &x, &mut e);
                            (a - b, (ga + gb) * C64::from(0.5))
                        }
                        None => (a, ga),
                    };
                    sq[4] += w * p.omega * p.mu0 / h * jump.norm_sqr();
                    sq[8] += w * h * avg.norm_squared();
                }
            }
            _ => {}
        }
    }
    let erule = p.rule(EntityKind::Segment, extra);
    for (ei, ed) in mesh.interface_edges.iter().enumerate() {
        let s = p.s_edge[ei];
        let h = ed.length;
        for (x, w) in edge_points(mesh, ei, &erule) {
            let mut jump = CVec3::zeros();
            let mut avg = CVec3::zeros();
            for side in 0..2 {
                let face = &mesh.faces[ed.faces[side]];
                let (_, c) = field.conductor(face.owner, &x, &mut e);
                avg += c / C64::from(2.0 * p.sigma[face.owner]);
                let (phi, _) = field.insulator(face.neighbor.unwrap().0, &x, &mut e);
                jump += ed.tangents[side].map(|t| phi * t);
            }
            sq[5] += w / (s * h * h) * jump.norm_squared();
            sq[7] += w * s * h * h * avg.norm_squared();
        }
    }
    let r = sq.map(|v| v.max(0.0).sqrt());
    NormReport {
        l2_conductor: r[0],
        curl: r[1],
        grad_insulator: r[2],
        jump_conductor: r[3],
        jump_insulator: r[4],
        jump_edge: r[5],
        avg_conductor: r[6],
        avg_edge: r[7],
        avg_insulator: r[8],
    }
}

pub fn dg_norm(p: &Problem, coeffs: &[C64]) -> NormReport {
    norm_of(p, &Discrete { p, coeffs }, 0)
}

/// `x^H N x` for a real-weighted Gram matrix.
pub fn quadratic(n: &CscMatrix, x: &[C64]) -> f64 {
    n.matvec(x).iter().zip(x).map(|(a, b)| (b.conj() * a).re).sum()
}

/// DG norm through the assembled Gram matrix.
pub fn dg_norm_matrix(n: &CscMatrix, x: &[C64]) -> f64 {
    quadratic(n, x).max(0.0).sqrt()
}

/// Error report of a discrete solution against an exact one, with quadrature
/// two degrees above assembly.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub norm: NormReport,
    pub k_error: f64,
}

pub fn error_against_exact(p: &Problem, coeffs: &[C64], exact: &ExactSolution) -> ErrorReport {
    let d = Difference(Discrete { p, coeffs }, Exact { p, exact });
    let k_error = (p.space.k_value(coeffs) - exact.k).norm();
    ErrorReport { norm: norm_of(p, &d, 2), k_error }
}

/// Observed orders between consecutive levels.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if errors.len() < 2 || hs.len() != errors.len() {
        return Err(AnalysisError::TooFewLevels);
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(AnalysisError::NonPositive(*e));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(AnalysisError::NotDecreasing);
    }
    Ok((1..errors.len()).map(|i| (errors[i - 1] / errors[i]).ln() / (hs[i - 1] / hs[i]).ln()).collect())
}

/// i.i.d. standard complex Gaussian vector.
pub fn complex_gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * s, im * s)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest `|xᵀAy − yᵀAx| / max(|xᵀAy|, 1)` over random pairs.
pub fn check_symmetry(a: &CscMatrix, samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = complex_gaussian(&mut r, a.n);
        let y = complex_gaussian(&mut r, a.n);
        let xy = a.bilinear(&x, &y);
        let yx = a.bilinear(&y, &x);
        worst = worst.max((xy - yx).norm() / xy.norm().max(1.0));
    }
    worst
}

#[derive(Clone, Copy, Debug)]
pub struct CoercivityReport {
    pub min_ratio: f64,
    pub samples: usize,
    pub passed: bool,
}

pub const COERCIVITY_BOUND: f64 = 0.5 - 1e-9;

/// Minimum of `Re[(1 − ı) xᵀ A x̄] / ‖x‖²` over random samples.
pub fn check_coercivity(a: &CscMatrix, norm: &CscMatrix, samples: usize, seed: u64) -> CoercivityReport {
    let mut r = rng(seed);
    let mut min_ratio = f64::INFINITY;
    let mut used = 0;
    for _ in 0..samples {
        let x = complex_gaussian(&mut r, a.n);
        let nn = quadratic(norm, &x);
        if nn <= 0.0 {
            continue;
        }
        let xbar: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        let v = (C64::new(1.0, -1.0) * a.bilinear(&x, &xbar)).re;
        min_ratio = min_ratio.min(v / nn);
        used += 1;
    }
    if min_ratio < COERCIVITY_BOUND {
        log::warn!("coercivity ratio {min_ratio:.3e} below 1/2: penalties are under-calibrated");
    }
    CoercivityReport { min_ratio, samples: used, passed: min_ratio >= COERCIVITY_BOUND }
}

/// Largest `|xᵀAy| / (‖x‖_* ‖y‖)` over random pairs.
pub fn boundedness(a: &CscMatrix, norm: &CscMatrix, star_extra: &CscMatrix, samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = complex_gaussian(&mut r, a.n);
        let y = complex_gaussian(&mut r, a.n);
        let xs = (quadratic(norm, &x) + quadratic(star_extra, &x)).sqrt();
        let yn = quadratic(norm, &y).sqrt();
        if xs > 0.0 && yn > 0.0 {
            worst = worst.max(a.bilinear(&x, &y).norm() / (xs * yn));
        }
    }
    worst
}

/// Largest generalized eigenvalue of `(b, a)` on the range of the positive
/// semidefinite `a`.
pub fn max_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let ea = SymmetricEigen::new(a.clone());
    let top = ea.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..a.nrows()).filter(|&i| ea.eigenvalues[i] > 1e-10 * top).collect();
    if keep.is_empty() {
        return 0.0;
    }
    let mut t = DMatrix::<f64>::zeros(a.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        t.set_column(j, &(ea.eigenvectors.column(i) / ea.eigenvalues[i].sqrt()));
    }
    let reduced = t.transpose() * b * &t;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    SymmetricEigen::new(reduced).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `h_K ‖v‖²_{∂K} / ‖v‖²_K` over polynomials of degree `k` and cells.
pub fn trace_constant(mesh: &Mesh, k: usize) -> f64 {
    let basis = LagrangeBasis::new(k);
    let n = basis.len();
    let vrule = quadrature(EntityKind::Tetrahedron, 2 * k).expect("degree");
    let frule = quadrature(EntityKind::Triangle, 2 * k).expect("degree");
    let mut v = vec![0.0; n];
    let mut g = vec![Point::zeros(); n];
    let mut mref = DMatrix::<f64>::zeros(n, n);
    for q in 0..vrule.len() {
        let r = vrule.reference(q);
        basis.eval(&Point::new(r[0], r[1], r[2]), &mut v, &mut g);
        for i in 0..n {
            for j in 0..n {
                mref[(i, j)] += vrule.weights[q] * v[i] * v[j];
            }
        }
    }
    let mut faces_ref = Vec::new();
    let corners = [Point::zeros(), Point::x(), Point::y(), Point::z()];
    for lf in LOCAL_FACES {
        let mut fm = DMatrix::<f64>::zeros(n, n);
        for q in 0..frule.len() {
            let l = frule.point(q);
            let xi = corners[lf[0]] * l[0] + corners[lf[1]] * l[1] + corners[lf[2]] * l[2];
            basis.eval(&xi, &mut v, &mut g);
            for i in 0..n {
                for j in 0..n {
                    fm[(i, j)] += 2.0 * frule.weights[q] * v[i] * v[j];
                }
            }
        }
        faces_ref.push(fm);
    }
    let mut worst: f64 = 0.0;
    for (c, geo) in mesh.geometry.iter().enumerate() {
        let vol = mref.clone() * geo.det;
        let mut bnd = DMatrix::<f64>::zeros(n, n);
        for (lf, fm) in faces_ref.iter().enumerate() {
            bnd += fm * mesh.faces[mesh.cell_faces[c][lf]].area;
        }
        worst = worst.max(geo.diameter * max_generalized_eigenvalue(&vol, &bnd));
    }
    worst
}

/// Constants of the inequalities bounding the star-norm averages by the
/// volume terms, maximized cellwise: `(conductor, insulator)`.
pub fn discrete_inequality_constants(p: &Problem) -> (f64, f64) {
    let mesh = p.mesh;
    let sp = p.space;
    let nb = sp.n_scalar();
    let vrule = p.rule(EntityKind::Tetrahedron, 0);
    let frule = p.rule(EntityKind::Triangle, 0);
    let erule = p.rule(EntityKind::Segment, 0);
    let mut e = CellEval::default();
    let (mut cc, mut ci): (f64, f64) = (0.0, 0.0);
    let mut edges_of_cell = vec![Vec::new(); mesh.n_cells()];
    for (ei, ed) in mesh.interface_edges.iter().enumerate() {
        for f in ed.faces {
            edges_of_cell[mesh.faces[f].owner].push(ei);
        }
    }
    let add_outer = |m: &mut DMatrix<f64>, g: &[Point], w: f64| {
        for a in 0..g.len() {
            for b in 0..g.len() {
                m[(a, b)] += w * g[a].dot(&g[b]);
            }
        }
    };
    for cell in 0..mesh.n_cells() {
        let geo = &mesh.geometry[cell];
        match mesh.cells[cell].region {
            Region::Conductor => {
                let s_inv = 1.0 / p.sigma[cell];
                let curls = |e: &CellEval| -> Vec<Point> {
                    (0..3).flat_map(|c| (0..nb).map(move |i| (c, i))).map(|(c, i)| e.grads[i].cross(&unit(c))).collect()
                };
                let mut vol = DMatrix::<f64>::zeros(3 * nb, 3 * nb);
                let mut bnd = vol.clone();
                for q in 0..vrule.len() {
                    let r = vrule.reference(q);
                    sp.eval_reference(mesh, cell, &Point::new(r[0], r[1], r[2]), &mut e);
                    add_outer(&mut vol, &curls(&e), vrule.weights[q] * geo.det * s_inv);
                }
                for &f in &mesh.cell_faces[cell] {
                    let face = &mesh.faces[f];
                    if !matches!(face.kind, FaceKind::InteriorConductor | FaceKind::Interface) {
                        continue;
                    }
                    let wf = p.s_face[f] * face.diameter * s_inv * s_inv;
                    for (x, w) in face_points(mesh, f, &frule) {
                        sp.eval(mesh, cell, &x, &mut e);
                        add_outer(&mut bnd, &curls(&e), w * wf);
                    }
                }
                for &ei in &edges_of_cell[cell] {
                    let ed = &mesh.interface_edges[ei];
                    let we = p.s_edge[ei] * ed.length * ed.length * s_inv * s_inv;
                    for (x, w) in edge_points(mesh, ei, &erule) {
                        sp.eval(mesh, cell, &x, &mut e);
                        add_outer(&mut bnd, &curls(&e), w * we);
                    }
                }
                cc = cc.max(max_generalized_eigenvalue(&vol, &bnd));
            }
            Region::Insulator => {
                let with_k = p.has_k(cell);
                let rho = p.rho.rho[cell];
                let grads = |e: &CellEval| -> Vec<Point> {
                    let mut g = e.grads.clone();
                    if with_k {
                        g.push(rho);
                    }
                    g
                };
                let nl = sp.n_local_scalar(cell) + usize::from(with_k);
                let mut vol = DMatrix::<f64>::zeros(nl, nl);
                let mut bnd = vol.clone();
                for q in 0..vrule.len() {
                    let r = vrule.reference(q);
                    sp.eval_reference(mesh, cell, &Point::new(r[0], r[1], r[2]), &mut e);
                    add_outer(&mut vol, &grads(&e), vrule.weights[q] * geo.det * p.omega * p.mu0);
                }
                for &f in &mesh.cell_faces[cell] {
                    let face = &mesh.faces[f];
                    if !(face.kind == FaceKind::InteriorInsulator || mesh.is_sigma(f)) {
                        continue;
                    }
                    for (x, w) in face_points(mesh, f, &frule) {
                        sp.eval(mesh, cell, &x, &mut e);
                        add_outer(&mut bnd, &grads(&e), w * face.diameter);
                    }
                }
                ci = ci.max(max_generalized_eigenvalue(&vol, &bnd));
            }
        }
    }
    (cc, ci)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_examples() {
        assert!((eoc(&[0.4, 0.2], &[0.2, 0.1]).unwrap()[0] - 1.0).abs() < 1e-14);
        assert!((eoc(&[0.16, 0.04], &[0.2, 0.1]).unwrap()[0] - 2.0).abs() < 1e-14);
        assert!(eoc(&[0.1], &[0.1]).is_err());
        assert!(eoc(&[0.1, 0.0], &[0.2, 0.1]).is_err());
        assert!(eoc(&[0.1, 0.05], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn generalized_eigenvalue_of_diagonal_pair() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 5.0]));
        assert!((max_generalized_eigenvalue(&a, &b) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trace_constant_of_constants() {
        // For v = 1 the ratio is h |∂K| / |K|, so the maximum is at least that.
        let m = crate::fixtures::unit_cube();
        let c0 = trace_constant(&m, 1);
        let g = &m.geometry[0];
        let area: f64 = m.cell_faces[0].iter().map(|&f| m.faces[f].area).sum();
        assert!(c0 >= g.diameter * area / g.volume - 1e-9);
    }
}
