//! Direct solve of the assembled system with a residual certificate.

use faer::linalg::solvers::Solve;
use faer::ColMut;
use thiserror::Error;

use crate::assembly::{AssembledSystem, Problem};
use crate::fespace::{CVec3, C64};
use crate::sparse::CscMatrix;
use crate::mesh::{Point, Region};
use crate::quadrature::EntityKind;

pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("right-hand side has length {rhs}, matrix is {n}x{n}")]
    Dimension { n: usize, rhs: usize },
    #[error("factorization failed: {0}")]
    Singular(String),
    #[error("solution contains non-finite entries")]
    NonFinite,
    #[error("residual {0:.3e} above tolerance {RESIDUAL_TOL:.0e}")]
    Residual(f64),
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub coeffs: Vec<C64>,
    pub n_conductor: usize,
    pub k: Option<C64>,
    /// `‖Ax − b‖_∞ / (‖A‖_∞ ‖x‖_∞ + ‖b‖_∞)`.
    pub residual: f64,
    pub refinements: usize,
    pub nnz: usize,
}

impl Solution {
    pub fn conductor(&self) -> &[C64] {
        &self.coeffs[..self.n_conductor]
    }

    pub fn insulator(&self) -> &[C64] {
        let end = self.coeffs.len() - usize::from(self.k.is_some());
        &self.coeffs[self.n_conductor..end]
    }
}

fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Relative residual as used in the certificate.
pub fn relative_residual(sys: &AssembledSystem, x: &[C64]) -> f64 {
    residual_of(&sys.matrix, &sys.rhs, x)
}

fn residual_of(a: &CscMatrix, b: &[C64], x: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<C64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    let scale = a.norm_inf() * norm_inf(x) + norm_inf(b);
    if scale == 0.0 {
        0.0
    } else {
        norm_inf(&r) / scale
    }
}

/// Sparse LU with up to two steps of iterative refinement.
pub fn solve(sys: &AssembledSystem, n_conductor: usize) -> Result<Solution, SolverError> {
    let mut out = solve_many(sys, &[&sys.rhs], n_conductor)?;
    Ok(out.pop().expect("one right-hand side"))
}

/// Factors `sys.matrix` once and solves for every load in `rhs`
/// (`sys.rhs` itself is ignored).
pub fn solve_many(sys: &AssembledSystem, rhs: &[&[C64]], n_conductor: usize) -> Result<Vec<Solution>, SolverError> {
    let n = sys.n();
    if let Some(b) = rhs.iter().find(|b| b.len() != n) {
        return Err(SolverError::Dimension { n, rhs: b.len() });
    }
    let k_slot = |x: &[C64]| if sys.has_k { Some(x[n - 1]) } else { None };
    let nnz = sys.matrix.nnz();
    let mut lu = None;
    let mut out = Vec::with_capacity(rhs.len());
    for b in rhs {
        if b.iter().all(|b| *b == C64::new(0.0, 0.0)) {
            let coeffs = vec![C64::new(0.0, 0.0); n];
            let k = k_slot(&coeffs);
            out.push(Solution { coeffs, n_conductor, k, residual: 0.0, refinements: 0, nnz });
            continue;
        }
        if lu.is_none() {
            lu = Some(sys.matrix.to_faer().sp_lu().map_err(|e| SolverError::Singular(format!("{e:?}")))?);
        }
        let lu = lu.as_ref().expect("factored");
        let mut x = b.to_vec();
        lu.solve_in_place(ColMut::from_slice_mut(&mut x));
        let mut residual = residual_of(&sys.matrix, b, &x);
        let mut refinements = 0;
        while residual > 1e-14 && refinements < 2 {
            let ax = sys.matrix.matvec(&x);
            let mut r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            lu.solve_in_place(ColMut::from_slice_mut(&mut r));
            let trial: Vec<C64> = x.iter().zip(&r).map(|(x, r)| x + r).collect();
            refinements += 1;
            let next = residual_of(&sys.matrix, b, &trial);
            if !(next < residual) {
                break;
            }
            x = trial;
            residual = next;
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        log::info!("solved n = {n}, nnz = {nnz}, residual = {residual:.2e}");
        if residual > RESIDUAL_TOL {
            return Err(SolverError::Residual(residual));
        }
        let k = k_slot(&x);
        out.push(Solution { coeffs: x, n_conductor, k, residual, refinements, nnz });
    }
    Ok(out)
}

/// `σ⁻¹(curl h_h − j)` at a point of a conductor cell.
pub fn electric_field(p: &Problem, coeffs: &[C64], j: &dyn Fn(usize, &Point) -> CVec3, cell: usize, x: &Point) -> CVec3 {
    let (_, curl) = p.space.conductor_field(p.mesh, cell, coeffs, x);
    (curl - j(cell, x)) / C64::from(p.sigma[cell])
}

/// Cell means of the electric field on conductor cells, `None` on insulator cells.
pub fn postprocess_e_field(p: &Problem, coeffs: &[C64], j: &dyn Fn(usize, &Point) -> CVec3) -> Vec<Option<CVec3>> {
    let rule = p.rule(EntityKind::Tetrahedron, 0);
    (0..p.mesh.n_cells())
        .map(|cell| {
            if p.mesh.cells[cell].region != Region::Conductor {
                return None;
            }
            let geo = &p.mesh.geometry[cell];
            let mut acc = CVec3::zeros();
            for q in 0..rule.len() {
                let r = rule.reference(q);
                let x = geo.to_physical(&Point::new(r[0], r[1], r[2]));
                acc += electric_field(p, coeffs, j, cell, &x) * C64::from(rule.weights[q] * 6.0);
            }
            Some(acc)
        })
        .collect()
}
