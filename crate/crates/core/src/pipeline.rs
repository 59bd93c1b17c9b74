//! Mesh-to-solution plumbing shared by the CLI, the tests and the demo.

use thiserror::Error;

use crate::analysis::{error_against_exact, ErrorReport};
use crate::assembly::{assemble_ah, assemble_generalized_load, AssembledSystem, AssemblyError, Materials, Penalties, Problem};
use crate::cohomology::{build_cut, build_harmonic_field, CohomologyError, HarmonicField, Topology};
use crate::fespace::{build_dg_space, DgSpace, SpaceError, C64};
use crate::mesh::Mesh;
use crate::mms::{build_exact, mms_sources, MmsError};
use crate::solver::{solve, solve_many, Solution, SolverError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Mms(#[from] MmsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A mesh with its cohomology field and discrete space.
pub struct Setup {
    pub mesh: Mesh,
    pub field: HarmonicField,
    pub space: DgSpace,
}

impl Setup {
    pub fn new(mesh: Mesh, m: usize, topology: Topology, hint: Option<&[usize]>) -> Result<Setup, PipelineError> {
        let cut = build_cut(&mesh, topology, hint)?;
        let field = build_harmonic_field(&mesh, &cut)?;
        let space = build_dg_space(&mesh, m, !field.is_zero())?;
        Ok(Setup { mesh, field, space })
    }

    pub fn with_field(mesh: Mesh, m: usize, field: HarmonicField) -> Result<Setup, PipelineError> {
        let space = build_dg_space(&mesh, m, !field.is_zero())?;
        Ok(Setup { mesh, field, space })
    }

    pub fn problem(&self, materials: &Materials, pen: Penalties) -> Result<Problem<'_>, PipelineError> {
        Ok(Problem::new(&self.mesh, &self.space, materials, &self.field, pen)?)
    }
}

/// Result of solving against a manufactured solution.
pub struct MmsRun {
    pub solution: Solution,
    pub error: ErrorReport,
    pub n_dofs: usize,
    pub h: f64,
}

/// Assembles the system whose exact solution is the named catalog entry.
pub fn mms_system(p: &Problem, name: &str) -> Result<AssembledSystem, PipelineError> {
    let exact = build_exact(name, p.mesh, p.rho, p.space.degree)?;
    let src = mms_sources(p, &exact)?;
    Ok(AssembledSystem { matrix: assemble_ah(p), rhs: assemble_generalized_load(p, &src), has_k: p.space.k_dof.is_some() })
}

pub fn run_mms(p: &Problem, name: &str) -> Result<MmsRun, PipelineError> {
    let sys = mms_system(p, name)?;
    let solution = solve(&sys, p.space.n_conductor)?;
    let exact = build_exact(name, p.mesh, p.rho, p.space.degree)?;
    let error = error_against_exact(p, &solution.coeffs, &exact);
    Ok(MmsRun { solution, error, n_dofs: p.n(), h: p.mesh.h() })
}

/// Runs several catalog entries against one factorization.
pub fn run_mms_many(p: &Problem, names: &[&str]) -> Result<Vec<MmsRun>, PipelineError> {
    let matrix = assemble_ah(p);
    let mut exacts = Vec::with_capacity(names.len());
    let mut loads = Vec::with_capacity(names.len());
    for name in names {
        let exact = build_exact(name, p.mesh, p.rho, p.space.degree)?;
        loads.push(assemble_generalized_load(p, &mms_sources(p, &exact)?));
        exacts.push(exact);
    }
    let sys = AssembledSystem { matrix, rhs: Vec::new(), has_k: p.space.k_dof.is_some() };
    let refs: Vec<&[C64]> = loads.iter().map(|b| b.as_slice()).collect();
    let sols = solve_many(&sys, &refs, p.space.n_conductor)?;
    Ok(sols
        .into_iter()
        .zip(&exacts)
        .map(|(solution, exact)| {
            let error = error_against_exact(p, &solution.coeffs, exact);
            MmsRun { solution, error, n_dofs: p.n(), h: p.mesh.h() }
        })
        .collect())
}

/// Nodal interpolant of a catalog entry (extras and the cohomology slot from
/// the exact data).
pub fn interpolate_exact(p: &Problem, name: &str) -> Result<Vec<C64>, PipelineError> {
    let exact = build_exact(name, p.mesh, p.rho, p.space.degree)?;
    Ok(p.space.interpolate(p.mesh, |c, x| (exact.h)(c, x).h, |c, x| (exact.psi)(c, x).psi, exact.k))
}
