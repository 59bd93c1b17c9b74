//! The three CLI modes: solve, verify and convergence.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use thiserror::Error;

use crate::analysis::{discrete_inequality_constants, eoc, Discrete, Field};
use crate::assembly::{assemble_system, AssemblyError, Problem};
use crate::cohomology::{build_harmonic_field, parse_cut, CohomologyError, Topology};
use crate::config::{ConfigError, MeshSource, Mode, RunConfig};
use crate::fespace::{CVec3, CellEval, C64};
use crate::mesh::{Mesh, MeshError, Point, Region};
use crate::mms::build_exact;
use crate::msh::{load_msh, MshOptions};
use crate::pipeline::{run_mms, PipelineError, Setup};
use crate::solver::{postprocess_e_field, solve, Solution, SolverError};
use crate::verify::{self, Check};
use crate::vtk::write_vtk;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Verification(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

impl From<PipelineError> for RunError {
    fn from(e: PipelineError) -> RunError {
        match e {
            PipelineError::Cohomology(e) => RunError::Cohomology(e),
            PipelineError::Space(e) => RunError::Verification(e.to_string()),
            PipelineError::Assembly(e) => RunError::Assembly(e),
            PipelineError::Mms(e) => RunError::Config(ConfigError::Key { key: "run.mms".into(), msg: e.to_string() }),
            PipelineError::Solver(e) => RunError::Solver(e),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Assembly(_) => 2,
            RunError::Mesh(_) | RunError::Cohomology(_) => 3,
            RunError::Solver(_) => 4,
            RunError::Verification(_) => 5,
            RunError::Io(..) => 1,
        }
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| RunError::Io(path.clone(), e))?;
    Ok(path)
}

pub fn load_mesh(cfg: &RunConfig, level: usize) -> Result<Mesh, RunError> {
    Ok(match &cfg.mesh {
        MeshSource::Fixture(f) => f.build(level),
        MeshSource::File(path) => load_msh(path, &MshOptions::default())?,
    })
}

pub fn load_setup(cfg: &RunConfig, level: usize) -> Result<Setup, RunError> {
    let mesh = load_mesh(cfg, level)?;
    for d in &mesh.diagnostics {
        log::warn!("{d:?}");
    }
    let setup = match &cfg.cut {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| RunError::Io(path.clone(), e))?;
            let cut = parse_cut(&mesh, &text)?;
            let field = build_harmonic_field(&mesh, &cut)?;
            Setup::with_field(mesh, cfg.degree, field)?
        }
        None => Setup::new(mesh, cfg.degree, Topology::Auto, cfg.hint.as_deref())?,
    };
    info!(
        "mesh: {} cells, h = {:.4}, cut faces = {}, dofs = {}",
        setup.mesh.n_cells(),
        setup.mesh.h(),
        setup.field.cut.faces.len(),
        setup.space.n_dofs
    );
    Ok(setup)
}

/// Runs the configured mode and returns the files it wrote.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    match cfg.mode {
        Mode::Solve => run_solve(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::Convergence => run_convergence(cfg),
    }
}

/// Cell averages at the centroid: `|h|` or `|∇ψ + kρ|`, and `Re ψ` (zero in
/// the conductor).
fn cell_fields(p: &Problem, coeffs: &[C64]) -> (Vec<f64>, Vec<f64>) {
    let d = Discrete { p, coeffs };
    let mut e = CellEval::default();
    let mut mag = Vec::with_capacity(p.mesh.n_cells());
    let mut psi = Vec::with_capacity(p.mesh.n_cells());
    for (c, cell) in p.mesh.cells.iter().enumerate() {
        let x = p.mesh.geometry[c].centroid;
        if cell.region == Region::Conductor {
            mag.push(d.conductor(c, &x, &mut e).0.norm());
            psi.push(0.0);
        } else {
            let (v, g) = d.insulator(c, &x, &mut e);
            mag.push(g.norm());
            psi.push(v.re);
        }
    }
    (mag, psi)
}

fn certificate_text(cfg: &RunConfig, p: &Problem, s: &Solution) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "degree = {}", cfg.degree);
    let _ = writeln!(t, "cells = {}", p.mesh.n_cells());
    let _ = writeln!(t, "h = {:.6e}", p.mesh.h());
    let _ = writeln!(t, "dofs = {}", p.n());
    let _ = writeln!(t, "nnz = {}", s.nnz);
    let _ = writeln!(t, "refinements = {}", s.refinements);
    let _ = writeln!(t, "relative_residual = {:.6e}", s.residual);
    if let Some(k) = s.k {
        let _ = writeln!(t, "k = {:.12e} {:+.12e}i", k.re, k.im);
    }
    t
}

fn run_solve(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let setup = load_setup(cfg, cfg.level)?;
    let p = setup.problem(&cfg.materials, cfg.penalties)?;
    let mut out = Vec::new();
    let (solution, j): (Solution, Box<dyn Fn(usize, &Point) -> CVec3>) = match cfg.current {
        Some(jc) => {
            let jv = CVec3::new(jc[0].into(), jc[1].into(), jc[2].into());
            let j = move |_: usize, _: &Point| jv;
            let sys = assemble_system(&p, &j);
            (solve(&sys, p.space.n_conductor)?, Box::new(j))
        }
        None => {
            let r = run_mms(&p, &cfg.mms)?;
            info!("{}: DG error {:.4e}, |k error| {:.3e}", cfg.mms, r.error.norm.total(), r.error.k_error);
            (r.solution, Box::new(|_: usize, _: &Point| CVec3::zeros()))
        }
    };
    info!("solved {} dofs, residual {:.3e}", p.n(), solution.residual);

    let mut csv = String::from("dof,re,im\n");
    for (i, c) in solution.coeffs.iter().enumerate() {
        let _ = writeln!(csv, "{i},{:e},{:e}", c.re, c.im);
    }
    out.push(write(&cfg.output, "solution.csv", &csv)?);
    out.push(write(&cfg.output, "certificate.txt", &certificate_text(cfg, &p, &solution))?);

    if cfg.vtk {
        let (mag, psi) = cell_fields(&p, &solution.coeffs);
        let e: Vec<f64> = postprocess_e_field(&p, &solution.coeffs, &*j).iter().map(|e| e.map_or(0.0, |e| e.norm())).collect();
        let vtk = write_vtk(&p.mesh, "eddydg solution", &[("field_magnitude", mag), ("e_magnitude", e), ("re_psi", psi)]);
        out.push(write(&cfg.output, "solution.vtk", &vtk)?);
    }
    Ok(out)
}

fn run_verify(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    let setup = load_setup(cfg, cfg.level)?;
    let p = setup.problem(&cfg.materials, cfg.penalties)?;
    let mut checks: Vec<Check> = Vec::new();
    checks.push(verify::symmetry(&p, cfg.samples, cfg.seed));
    checks.push(verify::coercivity(&p, cfg.samples, cfg.seed));
    checks.push(verify::jump_annihilation(&p)?);
    checks.push(verify::consistency(&p)?);
    checks.extend(verify::cohomology(&p));
    checks.extend(verify::certificate(&p)?);

    let mut report = String::new();
    let (cc, ci) = discrete_inequality_constants(&p);
    let _ = writeln!(report, "discrete inequality constants: C_C = {cc:.4}, C_I = {ci:.4}");
    if let MeshSource::Fixture(_) = cfg.mesh {
        let meshes: Vec<Mesh> = cfg.levels.iter().map(|&l| load_mesh(cfg, l)).collect::<Result<_, _>>()?;
        let refs: Vec<&Mesh> = meshes.iter().collect();
        let (c, check) = verify::trace_inequality(&refs, cfg.degree);
        let _ = writeln!(report, "trace constants by level: {c:.4?}");
        checks.push(check);
    }
    for c in &checks {
        let _ = writeln!(report, "{c}");
        info!("{c}");
    }
    let path = write(&cfg.output, "report.txt", &report)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(RunError::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

/// One row of the convergence table.
#[derive(Clone, Debug)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub dg_error: f64,
    pub components: [f64; 6],
    pub k_error: f64,
}

pub fn convergence_rows(cfg: &RunConfig) -> Result<(Vec<LevelRow>, f64), RunError> {
    let mut rows = Vec::new();
    let mut regularity = f64::INFINITY;
    for &level in &cfg.levels {
        let setup = load_setup(cfg, level)?;
        let p = setup.problem(&cfg.materials, cfg.penalties)?;
        regularity = build_exact(&cfg.mms, &setup.mesh, &setup.field, cfg.degree).map_err(PipelineError::from)?.regularity;
        let r = run_mms(&p, &cfg.mms)?;
        info!("level {level}: h = {:.4}, dofs = {}, error = {:.4e}", r.h, r.n_dofs, r.error.norm.total());
        rows.push(LevelRow {
            level,
            h: r.h,
            dofs: r.n_dofs,
            dg_error: r.error.norm.total(),
            components: r.error.norm.components(),
            k_error: r.error.k_error,
        });
    }
    Ok((rows, regularity))
}

pub fn eoc_threshold(m: usize, regularity: f64) -> f64 {
    0.85 * (m as f64).min(regularity)
}

fn run_convergence(cfg: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    if !matches!(cfg.mesh, MeshSource::Fixture(_)) {
        return Err(ConfigError::Key { key: "run.fixture".into(), msg: "convergence needs a fixture family".into() }.into());
    }
    if cfg.levels.len() < 2 {
        return Err(ConfigError::Key { key: "run.levels".into(), msg: "need at least two levels".into() }.into());
    }
    let (rows, s) = convergence_rows(cfg)?;
    let errs: Vec<f64> = rows.iter().map(|r| r.dg_error).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let rates = eoc(&errs, &hs).map_err(|e| RunError::Verification(e.to_string()))?;
    let mut csv = String::from("level,h,dg_error,err_curl,err_l2C,err_gradI,jumpC,jumpI,jumpE,eoc\n");
    for (i, r) in rows.iter().enumerate() {
        let c = r.components;
        let rate = if i == 0 { String::new() } else { format!("{:.4}", rates[i - 1]) };
        let _ = writeln!(
            csv,
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{rate}",
            r.level, r.h, r.dg_error, c[1], c[0], c[2], c[3], c[4], c[5]
        );
    }
    let path = write(&cfg.output, "errors.csv", &csv)?;
    let last = *rates.last().expect("two levels");
    let bound = eoc_threshold(cfg.degree, s);
    if last < bound {
        return Err(RunError::Verification(format!("final EOC {last:.3} below {bound:.3}")));
    }
    Ok(vec![path])
}
