//! Property checks run by the `verify` mode and the acceptance suite.

use std::fmt;

use crate::analysis::{check_coercivity, check_symmetry, dg_norm, trace_constant};
use crate::assembly::{assemble_ah, assemble_form, AssembledSystem, Form, Problem};
use crate::cohomology::validate_harmonic_field;
use crate::fespace::C64;
use crate::mesh::Mesh;
use crate::mms::build_exact;
use crate::pipeline::{interpolate_exact, mms_system, PipelineError};
use crate::solver::{solve, RESIDUAL_TOL};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const JUMP_TOL: f64 = 1e-10;
pub const CONSISTENCY_TOL: f64 = 1e-8;
pub const TRACE_SPREAD_TOL: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: impl Into<String>, passed: bool) -> Check {
        Check { name: name.into(), value, bound: bound.into(), passed }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {:>12.4e}  ({})", self.name, self.value, self.bound)
    }
}

pub fn symmetry(p: &Problem, samples: usize, seed: u64) -> Check {
    let v = check_symmetry(&assemble_ah(p), samples, seed);
    Check::new("symmetry", v, format!("<= {SYMMETRY_TOL:e}"), v <= SYMMETRY_TOL)
}

pub fn coercivity(p: &Problem, samples: usize, seed: u64) -> Check {
    let r = check_coercivity(&assemble_ah(p), &assemble_form(p, Form::Norm), samples, seed);
    let name = if r.passed { "coercivity" } else { "coercivity (calibration failure)" };
    Check::new(name, r.min_ratio, ">= 0.5 - 1e-9", r.passed)
}

/// Jumps of the compatible interpolant of the gradient pair, relative to its
/// volume terms.
pub fn jump_annihilation(p: &Problem) -> Result<Check, PipelineError> {
    let exact = build_exact("gradient_pair", p.mesh, p.rho, p.space.degree)?;
    let x = p.space.interpolate_potential(p.mesh, |x| (exact.psi)(0, x).psi);
    let r = dg_norm(p, &x);
    let v = r.jumps() / r.volume();
    Ok(Check::new("jump annihilation", v, format!("<= {JUMP_TOL:e} x volume"), v <= JUMP_TOL))
}

/// `‖A x* − b‖_∞ / ‖b‖_∞` for the interpolant of the degree-`m` entry.
pub fn consistency(p: &Problem) -> Result<Check, PipelineError> {
    let sys = mms_system(p, "polynomial_pair")?;
    let x = interpolate_exact(p, "polynomial_pair")?;
    let ax = sys.matrix.matvec(&x);
    let r = ax.iter().zip(&sys.rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let b = sys.rhs.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let v = r / b.max(f64::MIN_POSITIVE);
    Ok(Check::new("consistency", v, format!("<= {CONSISTENCY_TOL:e}"), v <= CONSISTENCY_TOL))
}

/// Largest trace constant over degrees `1..=m+1` per mesh, and its relative
/// spread across the meshes.
pub fn trace_inequality(meshes: &[&Mesh], m: usize) -> (Vec<f64>, Check) {
    let c: Vec<f64> = meshes.iter().map(|mesh| (1..=m + 1).map(|k| trace_constant(mesh, k)).fold(0.0, f64::max)).collect();
    let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = c.iter().cloned().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    let ok = spread.is_finite() && spread <= TRACE_SPREAD_TOL;
    (c, Check::new("trace constant spread", spread, format!("<= {TRACE_SPREAD_TOL}"), ok))
}

pub fn cohomology(p: &Problem) -> Vec<Check> {
    let r = validate_harmonic_field(p.mesh, p.rho);
    let mut out = vec![
        Check::new("curl of rho", r.curl, "exactly 0", r.curl_ok),
        Check::new("rho x n on sigma", r.sigma, "<= 1e-12", r.sigma_ok),
        Check::new("tangential continuity of rho", r.tangential, "<= 1e-12", r.tangential_ok),
    ];
    if let Some(c) = r.circulation {
        out.push(Check::new("circulation of rho", c, "|c| = 1 within 1e-10", r.circulation_ok));
    }
    out
}

/// Zero load gives the zero solution exactly, and a polynomial solve carries
/// a residual certificate.
pub fn certificate(p: &Problem) -> Result<Vec<Check>, PipelineError> {
    let zero = AssembledSystem { matrix: assemble_ah(p), rhs: vec![C64::new(0.0, 0.0); p.n()], has_k: p.space.k_dof.is_some() };
    let z = solve(&zero, p.space.n_conductor)?;
    let zmax = z.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let sol = solve(&mms_system(p, "polynomial_pair")?, p.space.n_conductor)?;
    Ok(vec![
        Check::new("zero load gives zero", zmax, "exactly 0", zmax == 0.0),
        Check::new("residual certificate", sol.residual, format!("<= {RESIDUAL_TOL:e}"), sol.residual <= RESIDUAL_TOL),
    ])
}
