//! Run configuration: a TOML file with `[run]`, `[materials]` and
//! `[penalties]` sections, each key overridable from the command line.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;
use toml::{Table, Value};

use crate::assembly::{Materials, Penalties};
use crate::fixtures::Fixture;
use crate::mms::CATALOG;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("{key}: {msg}")]
    Key { key: String, msg: String },
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key { key: key.into(), msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Verify,
    Convergence,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "solve" => Some(Mode::Solve),
            "verify" => Some(Mode::Verify),
            "convergence" => Some(Mode::Convergence),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Fixture(Fixture),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub mesh: MeshSource,
    pub level: usize,
    pub levels: Vec<usize>,
    pub degree: usize,
    pub mms: String,
    /// Constant applied current density; replaces the manufactured load in
    /// solve mode.
    pub current: Option<[f64; 3]>,
    pub output: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub vtk: bool,
    pub cut: Option<PathBuf>,
    pub hint: Option<Vec<usize>>,
    pub materials: Materials,
    pub penalties: Penalties,
}

const RUN_KEYS: [&str; 14] = [
    "mode", "mesh", "fixture", "level", "levels", "degree", "mms", "current", "output", "seed", "samples", "vtk", "cut", "hint",
];
const PENALTY_KEYS: [&str; 4] = ["a_c", "a_i", "alpha", "scale"];

/// Section owning a bare key (`degree` → `run`, `sigma.copper` → `materials`).
fn section_of(key: &str) -> Option<&'static str> {
    let head = key.split('.').next().unwrap_or(key);
    if RUN_KEYS.contains(&head) {
        Some("run")
    } else if ["omega", "mu0", "mu", "sigma"].contains(&head) {
        Some("materials")
    } else if PENALTY_KEYS.contains(&head) {
        Some("penalties")
    } else {
        None
    }
}

/// A command-line value: TOML syntax when it parses, a string otherwise.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `--key value` pairs; keys may be bare or `section.key`.
pub fn apply_overrides(table: &mut Table, args: &[String]) -> Result<(), ConfigError> {
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag.strip_prefix("--").ok_or_else(|| bad(flag, "expected --key"))?.replace('-', "_");
        let raw = it.next().ok_or_else(|| bad(&key, "missing value"))?;
        let (section, rest) = match key.split_once('.') {
            Some((s, r)) if ["run", "materials", "penalties"].contains(&s) => (s.to_string(), r.to_string()),
            _ => (section_of(&key).ok_or_else(|| bad(&key, "unknown key"))?.to_string(), key.clone()),
        };
        let sec = table.entry(section.clone()).or_insert_with(|| Value::Table(Table::new()));
        let Value::Table(sec) = sec else { return Err(bad(&section, "not a section")) };
        match rest.split_once('.') {
            Some((name, mat)) if section == "materials" => {
                let sub = sec.entry(name.to_string()).or_insert_with(|| Value::Table(Table::new()));
                match sub {
                    Value::Table(t) => {
                        t.insert(mat.to_string(), parse_value(raw));
                    }
                    _ => {
                        let mut t = Table::new();
                        t.insert("default".into(), sub.clone());
                        t.insert(mat.to_string(), parse_value(raw));
                        *sub = Value::Table(t);
                    }
                }
            }
            _ => {
                sec.insert(rest, parse_value(raw));
            }
        }
    }
    Ok(())
}

fn get<'a>(t: &'a Table, section: &str, key: &str) -> Option<&'a Value> {
    t.get(section).and_then(|s| s.as_table()).and_then(|s| s.get(key))
}

fn num(t: &Table, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
    match get(t, section, key) {
        None => Ok(default),
        Some(Value::Float(f)) => Ok(*f),
        Some(Value::Integer(i)) => Ok(*i as f64),
        Some(v) => Err(bad(&format!("{section}.{key}"), format!("expected a number, got {v}"))),
    }
}

fn uint(t: &Table, key: &str, default: usize) -> Result<usize, ConfigError> {
    match get(t, "run", key) {
        None => Ok(default),
        Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
        Some(v) => Err(bad(&format!("run.{key}"), format!("expected a non-negative integer, got {v}"))),
    }
}

fn string(t: &Table, key: &str) -> Result<Option<String>, ConfigError> {
    match get(t, "run", key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(v) => Ok(Some(v.to_string())),
    }
}

fn uint_list(t: &Table, key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
    let full = format!("run.{key}");
    match get(t, "run", key) {
        None => Ok(None),
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| v.as_integer().filter(|i| *i >= 0).map(|i| i as usize).ok_or_else(|| bad(&full, "expected integers")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(vec![*i as usize])),
        Some(Value::String(s)) => s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad(&full, format!("bad integer '{p}'"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(v) => Err(bad(&full, format!("expected a list, got {v}"))),
    }
}

/// A material parameter: a number, or a table with per-material entries and
/// an optional `default`.
fn material_map(t: &Table, key: &str) -> Result<(Option<f64>, BTreeMap<String, f64>), ConfigError> {
    let full = format!("materials.{key}");
    match get(t, "materials", key) {
        None => Ok((None, BTreeMap::new())),
        Some(Value::Table(m)) => {
            let mut out = BTreeMap::new();
            let mut default = None;
            for (name, v) in m {
                let x = v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(|| bad(&format!("{full}.{name}"), "expected a number"))?;
                if name == "default" {
                    default = Some(x);
                } else {
                    out.insert(name.clone(), x);
                }
            }
            Ok((default, out))
        }
        Some(v) => Ok((Some(v.as_float().or_else(|| v.as_integer().map(|i| i as f64)).ok_or_else(|| bad(&full, "expected a number"))?), BTreeMap::new())),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_table(t: &Table, mode_override: Option<Mode>) -> Result<RunConfig, ConfigError> {
        for (section, v) in t {
            let Some(sec) = v.as_table() else { return Err(bad(section, "expected a section")) };
            for key in sec.keys() {
                if section_of(key) != Some(section.as_str()) {
                    return Err(bad(&format!("{section}.{key}"), "unknown key"));
                }
            }
        }
        let mode = match (mode_override, string(t, "mode")?) {
            (Some(m), _) => m,
            (None, Some(s)) => Mode::parse(&s).ok_or_else(|| bad("run.mode", format!("unknown mode '{s}'")))?,
            (None, None) => Mode::Solve,
        };
        let mesh = match (string(t, "mesh")?, string(t, "fixture")?) {
            (Some(_), Some(_)) => return Err(bad("run.mesh", "give either mesh or fixture")),
            (Some(p), None) => MeshSource::File(p.into()),
            (None, f) => {
                let name = f.unwrap_or_else(|| "cube".into());
                MeshSource::Fixture(Fixture::parse(&name).ok_or_else(|| bad("run.fixture", format!("unknown fixture '{name}'")))?)
            }
        };
        let degree = uint(t, "degree", 1)?;
        if !(1..=3).contains(&degree) {
            return Err(bad("run.degree", format!("must be 1, 2 or 3, got {degree}")));
        }
        let level = uint(t, "level", 1)?;
        if level == 0 {
            return Err(bad("run.level", "must be at least 1"));
        }
        let levels = uint_list(t, "levels")?.unwrap_or_else(|| vec![1, 2, 3]);
        if levels.is_empty() || levels.contains(&0) {
            return Err(bad("run.levels", "need positive levels"));
        }
        let mms = string(t, "mms")?.unwrap_or_else(|| "gradient_pair".into());
        if !CATALOG.contains(&mms.as_str()) {
            return Err(bad("run.mms", format!("unknown entry '{mms}' (known: {})", CATALOG.join(", "))));
        }
        let current = match get(t, "run", "current") {
            None => None,
            Some(Value::Array(a)) if a.len() == 3 => {
                let v: Option<Vec<f64>> = a.iter().map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64))).collect();
                let v = v.ok_or_else(|| bad("run.current", "expected three numbers"))?;
                Some([v[0], v[1], v[2]])
            }
            Some(_) => return Err(bad("run.current", "expected three numbers")),
        };
        let vtk = match get(t, "run", "vtk") {
            None => false,
            Some(Value::Boolean(b)) => *b,
            Some(v) => return Err(bad("run.vtk", format!("expected true or false, got {v}"))),
        };
        let seed = uint(t, "seed", 20240607)? as u64;
        let samples = uint(t, "samples", 100)?;

        let omega = positive("materials.omega", num(t, "materials", "omega", 1.0)?)?;
        let mu0 = positive("materials.mu0", num(t, "materials", "mu0", 1.0)?)?;
        let (mu_d, mu) = material_map(t, "mu")?;
        let (sigma_d, sigma) = material_map(t, "sigma")?;
        for (key, d, map) in [("mu", mu_d, &mu), ("sigma", sigma_d, &sigma)] {
            if let Some(d) = d {
                positive(&format!("materials.{key}"), d)?;
            }
            for (name, v) in map {
                positive(&format!("materials.{key}.{name}"), *v)?;
            }
        }
        let materials = Materials {
            omega,
            mu0,
            mu,
            sigma,
            default_mu: Some(mu_d.unwrap_or(1.0)),
            default_sigma: Some(sigma_d.unwrap_or(1.0)),
        };

        let d = Penalties::default_for(degree);
        let scale = positive("penalties.scale", num(t, "penalties", "scale", 1.0)?)?;
        let penalties = Penalties {
            a_c: positive("penalties.a_c", num(t, "penalties", "a_c", d.a_c)?)?,
            a_i: positive("penalties.a_i", num(t, "penalties", "a_i", d.a_i)?)?,
            alpha: positive("penalties.alpha", num(t, "penalties", "alpha", d.alpha)?)?,
        }
        .scaled(scale);
        if penalties.a_c.min(penalties.a_i).min(penalties.alpha) < d.a_c {
            log::warn!("penalties below the calibrated default {}: uniqueness is not guaranteed", d.a_c);
        }

        Ok(RunConfig {
            mode,
            mesh,
            level,
            levels,
            degree,
            mms,
            current,
            output: string(t, "output")?.unwrap_or_else(|| "out".into()).into(),
            seed,
            samples,
            vtk,
            cut: string(t, "cut")?.map(PathBuf::from),
            hint: uint_list(t, "hint")?,
            materials,
            penalties,
        })
    }

    pub fn parse(text: &str, overrides: &[String], mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
        let mut t: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        apply_overrides(&mut t, overrides)?;
        RunConfig::from_table(&t, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn defaults() {
        let c = RunConfig::parse("", &[], None).unwrap();
        assert_eq!(c.mode, Mode::Solve);
        assert_eq!(c.degree, 1);
        assert_eq!(c.penalties, Penalties::default_for(1));
        assert_eq!(c.levels, vec![1, 2, 3]);
    }

    #[test]
    fn sections_and_overrides() {
        let text = "[run]\ndegree = 2\nfixture = \"torus\"\n[materials]\nsigma = { default = 2.0, copper = 5 }\n[penalties]\nscale = 2\n";
        let c = RunConfig::parse(text, &args(&["--omega", "3", "--sigma.iron", "7", "--levels", "1,2"]), Some(Mode::Verify)).unwrap();
        assert_eq!(c.mode, Mode::Verify);
        assert_eq!(c.mesh, MeshSource::Fixture(Fixture::Torus));
        assert_eq!(c.materials.omega, 3.0);
        assert_eq!(c.materials.sigma_of("copper").unwrap(), 5.0);
        assert_eq!(c.materials.sigma_of("iron").unwrap(), 7.0);
        assert_eq!(c.materials.sigma_of("other").unwrap(), 2.0);
        assert_eq!(c.penalties.a_c, 180.0);
        assert_eq!(c.levels, vec![1, 2]);
    }

    #[test]
    fn zero_sigma_names_the_key() {
        let e = RunConfig::parse("[materials]\nsigma = 0\n", &[], None).unwrap_err();
        assert!(e.to_string().contains("materials.sigma"), "{e}");
        let e = RunConfig::parse("", &args(&["--sigma.copper", "-1"]), None).unwrap_err();
        assert!(e.to_string().contains("materials.sigma.copper"), "{e}");
    }

    #[test]
    fn rejects_unknown() {
        assert!(RunConfig::parse("[run]\nbogus = 1\n", &[], None).is_err());
        assert!(RunConfig::parse("", &args(&["--degree", "4"]), None).is_err());
        assert!(RunConfig::parse("", &args(&["--mms", "nope"]), None).is_err());
        assert!(RunConfig::parse("[run\n", &[], None).is_err());
        assert!(RunConfig::parse("", &args(&["--degree"]), None).is_err());
    }
}
