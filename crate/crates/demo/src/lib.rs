//! Browser bindings: cohomology of a fixture, one manufactured solve, and a
//! small convergence study. Results are returned as JSON strings.

use std::fmt::Write as _;

use eddydg::analysis::eoc;
use eddydg::assembly::{Materials, Penalties};
use eddydg::cohomology::{first_betti_number, validate_harmonic_field, Topology};
use eddydg::fixtures::Fixture;
use eddydg::mms::CATALOG;
use eddydg::pipeline::{run_mms, Setup};
use wasm_bindgen::prelude::*;

const MAX_LEVEL: usize = 2;

fn setup(fixture: &str, level: usize, degree: usize) -> Result<Setup, String> {
    let f = Fixture::parse(fixture).ok_or_else(|| format!("unknown fixture '{fixture}'"))?;
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(format!("level must be in 1..={MAX_LEVEL}"));
    }
    if !(1..=2).contains(&degree) {
        return Err("degree must be 1 or 2".into());
    }
    Setup::new(f.build(level), degree, Topology::Auto, None).map_err(|e| e.to_string())
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "null".into()
    }
}

pub fn cohomology_json(fixture: &str, level: usize) -> Result<String, String> {
    let s = setup(fixture, level, 1)?;
    let r = validate_harmonic_field(&s.mesh, &s.field);
    Ok(format!(
        "{{\"cells\":{},\"betti\":{},\"cut_faces\":{},\"curl\":{},\"rho_x_n\":{},\"circulation\":{},\"passed\":{}}}",
        s.mesh.n_cells(),
        first_betti_number(&s.mesh),
        s.field.cut.faces.len(),
        num(r.curl),
        num(r.sigma),
        r.circulation.map_or("null".into(), num),
        r.passed()
    ))
}

pub fn solve_json(fixture: &str, level: usize, degree: usize, mms: &str) -> Result<String, String> {
    let s = setup(fixture, level, degree)?;
    let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), Penalties::default_for(degree)).map_err(|e| e.to_string())?;
    let r = run_mms(&p, mms).map_err(|e| e.to_string())?;
    let k = r.solution.k.map_or("null".into(), |k| format!("[{},{}]", num(k.re), num(k.im)));
    Ok(format!(
        "{{\"dofs\":{},\"h\":{},\"residual\":{},\"dg_error\":{},\"k\":{k},\"k_error\":{}}}",
        r.n_dofs,
        num(r.h),
        num(r.solution.residual),
        num(r.error.norm.total()),
        num(r.error.k_error)
    ))
}

pub fn convergence_json(fixture: &str, degree: usize, mms: &str) -> Result<String, String> {
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for level in 1..=MAX_LEVEL {
        let s = setup(fixture, level, degree)?;
        let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), Penalties::default_for(degree)).map_err(|e| e.to_string())?;
        let r = run_mms(&p, mms).map_err(|e| e.to_string())?;
        errs.push(r.error.norm.total());
        hs.push(r.h);
    }
    let rates = eoc(&errs, &hs).map_err(|e| e.to_string())?;
    let mut rows = String::new();
    for (i, (e, h)) in errs.iter().zip(&hs).enumerate() {
        let rate = if i == 0 { "null".into() } else { num(rates[i - 1]) };
        let sep = if i == 0 { "" } else { "," };
        let _ = write!(rows, "{sep}{{\"level\":{},\"h\":{},\"dg_error\":{},\"eoc\":{rate}}}", i + 1, num(*h), num(*e));
    }
    Ok(format!("{{\"rows\":[{rows}]}}"))
}

#[wasm_bindgen]
pub fn catalog() -> String {
    CATALOG.join(",")
}

#[wasm_bindgen]
pub fn cohomology(fixture: &str, level: usize) -> Result<String, JsValue> {
    cohomology_json(fixture, level).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve(fixture: &str, level: usize, degree: usize, mms: &str) -> Result<String, JsValue> {
    solve_json(fixture, level, degree, mms).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn convergence(fixture: &str, degree: usize, mms: &str) -> Result<String, JsValue> {
    convergence_json(fixture, degree, mms).map_err(|e| JsValue::from_str(&e))
}
