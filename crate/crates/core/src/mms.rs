//! Manufactured exact solutions and the loads that make the discrete scheme
//! consistent with them.

use std::collections::VecDeque;
use std::f64::consts::PI;

use thiserror::Error;

use crate::assembly::{Problem, SourceBundle};
use crate::cohomology::HarmonicField;
use crate::fespace::{CVec3, C64};
use crate::jet::{curl, curl_curl, Jet};
use crate::mesh::{FaceKind, Mesh, Point, Region};
use crate::quadrature::EntityKind;

#[derive(Debug, Error)]
pub enum MmsError {
    #[error("unknown manufactured solution '{0}' (known: {known})", known = CATALOG.join(", "))]
    Unknown(String),
    #[error("'{0}' needs {1}")]
    Unavailable(&'static str, &'static str),
    #[error("transmission defect {0:.3e} on the interface")]
    Transmission(f64),
}

pub const CATALOG: [&str; 5] = ["zero", "gradient_pair", "polynomial_pair", "curl_bubble", "torus_circulation"];

/// `h`, `curl h` and `curl curl h` at a conductor point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConductorValue {
    pub h: CVec3,
    pub curl: CVec3,
    pub curl_curl: CVec3,
}

/// `ψ_K`, `∇ψ_K` and `Δψ_K` at an insulator point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsulatorValue {
    pub psi: C64,
    pub grad: CVec3,
    pub lap: C64,
}

impl ConductorValue {
    pub fn zero() -> Self {
        ConductorValue { h: CVec3::zeros(), curl: CVec3::zeros(), curl_curl: CVec3::zeros() }
    }

    /// `a ∇χ` for a scalar jet `χ`.
    fn gradient(a: C64, chi: &Jet) -> Self {
        ConductorValue { h: cvec(a, &chi.g), ..Self::zero() }
    }

    /// `a f` for a real vector field given by component jets.
    fn field(a: C64, f: &[Jet; 3]) -> Self {
        ConductorValue {
            h: cvec(a, &Point::new(f[0].v, f[1].v, f[2].v)),
            curl: cvec(a, &curl(f)),
            curl_curl: cvec(a, &curl_curl(f)),
        }
    }

    fn add(self, o: Self) -> Self {
        ConductorValue { h: self.h + o.h, curl: self.curl + o.curl, curl_curl: self.curl_curl + o.curl_curl }
    }
}

impl InsulatorValue {
    pub fn zero() -> Self {
        InsulatorValue { psi: C64::new(0.0, 0.0), grad: CVec3::zeros(), lap: C64::new(0.0, 0.0) }
    }

    fn scalar(a: C64, f: &Jet) -> Self {
        InsulatorValue { psi: a * f.v, grad: cvec(a, &f.g), lap: a * f.laplacian() }
    }

    fn add(self, o: Self) -> Self {
        InsulatorValue { psi: self.psi + o.psi, grad: self.grad + o.grad, lap: self.lap + o.lap }
    }
}

fn cvec(a: C64, v: &Point) -> CVec3 {
    v.map(|t| a * t)
}

type HFn<'a> = Box<dyn Fn(usize, &Point) -> ConductorValue + 'a>;
type PsiFn<'a> = Box<dyn Fn(usize, &Point) -> InsulatorValue + 'a>;

pub struct ExactSolution<'a> {
    pub name: &'static str,
    /// Sobolev regularity used to predict `h^min(s, m)`.
    pub regularity: f64,
    pub k: C64,
    /// Whether `ψ` vanishes on the outer boundary.
    pub satisfies_sigma: bool,
    pub h: HFn<'a>,
    pub psi: PsiFn<'a>,
}

impl ExactSolution<'_> {
    /// `∇ψ_K + kρ_K`.
    pub fn w(&self, rho: &HarmonicField, cell: usize, x: &Point) -> CVec3 {
        (self.psi)(cell, x).grad + cvec(self.k, &rho.rho[cell])
    }
}

/// Smooth potential vanishing on the bounding box of the mesh.
fn box_sine(lo: Point, hi: Point, x: &Point) -> Jet {
    let v = Jet::vars(x);
    (0..3).fold(Jet::constant(1.0), |acc, i| acc * ((v[i] + -lo[i]) * (PI / (hi[i] - lo[i]))).sin())
}

/// A global polynomial of total degree `m`.
fn poly(m: usize, x: &Point) -> Jet {
    let [a, b, c] = Jet::vars(x);
    let l = a + b * 0.5 + c * -0.7 + 0.3;
    l.powi(m as i32) + a * b.powi(m as i32 - 1) * 0.4
}

/// Product of `1 − ((x_i − c_i)/r_i)²`, vanishing on the conductor box.
fn box_bubble(lo: Point, hi: Point, x: &Point) -> Jet {
    let v = Jet::vars(x);
    (0..3).fold(Jet::constant(1.0), |acc, i| {
        let c = 0.5 * (lo[i] + hi[i]);
        let r = 0.5 * (hi[i] - lo[i]);
        let t = (v[i] + -c) * (1.0 / r);
        acc * (t * t * -1.0 + 1.0)
    })
}

pub const TORUS_R: f64 = 0.64;
pub const TORUS_EPS: f64 = 0.1;
pub const TORUS_CORE: f64 = 0.33;

/// `(ũ, z)` where `ũ = √(x² + y² + ε²) − R`, and the gradient of `ũ` as jets.
fn torus_coords(x: &Point) -> (Jet, Jet, [Jet; 3]) {
    let [a, b, c] = Jet::vars(x);
    let r = (a * a + b * b + TORUS_EPS * TORUS_EPS).sqrt();
    let ri = r.recip();
    (r + -TORUS_R, c, [a * ri, b * ri, Jet::constant(0.0)])
}

/// Winding angle around the core circle in turns.
pub fn torus_angle(x: &Point) -> Jet {
    let (u, z, _) = torus_coords(x);
    z.atan2(u).scale(1.0 / (2.0 * PI))
}

/// Smooth field equal to `∇` of the winding angle away from the core circle.
pub fn torus_vortex(x: &Point) -> [Jet; 3] {
    let (u, z, du) = torus_coords(x);
    let s = u * u + z * z;
    let d2 = TORUS_CORE * TORUS_CORE;
    let q = if s.v >= d2 {
        s.recip()
    } else {
        let t = s.scale(1.0 / d2);
        (t * t + t * -3.0 + 3.0).scale(1.0 / d2)
    };
    let dz = [0.0, 0.0, 1.0];
    std::array::from_fn(|i| ((u * dz[i]) - z * du[i]) * q.scale(1.0 / (2.0 * PI)))
}

/// Continuous branch of the winding angle per insulator cell and the sign
/// matching the cut potential.
struct Branches {
    reference: Vec<f64>,
    sign: f64,
}

fn nearest(theta: f64, reference: f64) -> f64 {
    theta + (reference - theta).round()
}

fn torus_branches(mesh: &Mesh, field: &HarmonicField) -> Result<Branches, MmsError> {
    let n = mesh.n_cells();
    let mut reference = vec![f64::NAN; n];
    let mut cut = vec![false; mesh.faces.len()];
    for &f in &field.cut.faces {
        cut[f] = true;
    }
    for start in 0..n {
        if mesh.cells[start].region != Region::Insulator || !reference[start].is_nan() {
            continue;
        }
        let c = mesh.geometry[start].centroid;
        reference[start] = torus_angle(&c).v;
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            for &f in &mesh.cell_faces[k] {
                let face = &mesh.faces[f];
                if face.kind != FaceKind::InteriorInsulator || cut[f] {
                    continue;
                }
                let other = if face.owner == k { face.neighbor.unwrap().0 } else { face.owner };
                if !reference[other].is_nan() {
                    continue;
                }
                let xf = mesh.face_centroid(f);
                let at_face = nearest(torus_angle(&xf).v, reference[k]);
                let co = mesh.geometry[other].centroid;
                reference[other] = nearest(torus_angle(&co).v, at_face);
                queue.push_back(other);
            }
        }
    }
    let mut sign = 0.0;
    for (&f, &plus) in field.cut.faces.iter().zip(&field.cut.plus) {
        let face = &mesh.faces[f];
        let minus = if face.owner == plus { face.neighbor.unwrap().0 } else { face.owner };
        let xf = mesh.face_centroid(f);
        let t = torus_angle(&xf).v;
        let d = nearest(t, reference[plus]) - nearest(t, reference[minus]);
        let s = d.round();
        if s.abs() != 1.0 || (sign != 0.0 && s != sign) {
            return Err(MmsError::Unavailable("torus_circulation", "a cut crossed once by the winding angle"));
        }
        sign = s;
    }
    if sign == 0.0 {
        return Err(MmsError::Unavailable("torus_circulation", "a nonempty cut"));
    }
    Ok(Branches { reference, sign })
}

/// Builds a catalog entry for the given mesh, cohomology field and degree.
pub fn build_exact<'a>(name: &str, mesh: &'a Mesh, field: &'a HarmonicField, m: usize) -> Result<ExactSolution<'a>, MmsError> {
    let amp = C64::new(1.0, 0.5);
    let (lo, hi) = mesh.bounding_box();
    Ok(match name {
        "zero" => ExactSolution {
            name: "zero",
            regularity: f64::INFINITY,
            k: C64::new(0.0, 0.0),
            satisfies_sigma: true,
            h: Box::new(|_, _| ConductorValue::zero()),
            psi: Box::new(|_, _| InsulatorValue::zero()),
        },
        "gradient_pair" => ExactSolution {
            name: "gradient_pair",
            regularity: f64::INFINITY,
            k: C64::new(0.0, 0.0),
            satisfies_sigma: true,
            h: Box::new(move |_, x| ConductorValue::gradient(amp, &box_sine(lo, hi, x))),
            psi: Box::new(move |_, x| InsulatorValue::scalar(amp, &box_sine(lo, hi, x))),
        },
        "polynomial_pair" => ExactSolution {
            name: "polynomial_pair",
            regularity: f64::INFINITY,
            k: C64::new(0.0, 0.0),
            satisfies_sigma: false,
            h: Box::new(move |_, x| ConductorValue::gradient(amp, &poly(m, x))),
            psi: Box::new(move |_, x| InsulatorValue::scalar(amp, &poly(m, x))),
        },
        "curl_bubble" => {
            let (clo, chi) = mesh.conductor_box().ok_or(MmsError::Unavailable("curl_bubble", "a conductor"))?;
            let dir = Point::new(1.0, -0.5, 0.25);
            ExactSolution {
                name: "curl_bubble",
                regularity: f64::INFINITY,
                k: C64::new(0.0, 0.0),
                satisfies_sigma: true,
                h: Box::new(move |_, x| {
                    let b = box_bubble(clo, chi, x);
                    let f = [b.scale(dir.x), b.scale(dir.y), b.scale(dir.z)];
                    ConductorValue::gradient(amp, &box_sine(lo, hi, x)).add(ConductorValue::field(C64::new(0.0, 1.0), &f))
                }),
                psi: Box::new(move |_, x| InsulatorValue::scalar(amp, &box_sine(lo, hi, x))),
            }
        }
        "torus_circulation" => {
            if field.is_zero() {
                return Err(MmsError::Unavailable("torus_circulation", "a non-trivial cohomology field"));
            }
            let br = torus_branches(mesh, field)?;
            let k = C64::new(0.8, -0.3);
            let chi = |x: &Point| {
                let [a, b, c] = Jet::vars(x);
                a * b * 0.3 + c * 0.5
            };
            ExactSolution {
                name: "torus_circulation",
                regularity: 2.5,
                k,
                satisfies_sigma: false,
                h: Box::new(move |_, x| {
                    ConductorValue::gradient(C64::from(1.0), &chi(x)).add(ConductorValue::field(k * br.sign, &torus_vortex(x)))
                }),
                psi: Box::new(move |cell, x| {
                    let mut t = torus_angle(x);
                    t.v = nearest(t.v, br.reference[cell]);
                    let p = Jet { v: field.potential_at(mesh, cell, x), g: field.rho[cell], h: Default::default() };
                    InsulatorValue::scalar(C64::from(1.0), &chi(x)).add(InsulatorValue::scalar(k, &(t.scale(br.sign) - p)))
                }),
            }
        }
        other => return Err(MmsError::Unknown(other.into())),
    })
}

/// Largest `|(h − ∇ψ − kρ) × n|` over interface quadrature points, relative
/// to `max(1, |h|)`.
pub fn transmission_defect(p: &Problem, exact: &ExactSolution) -> f64 {
    let rule = p.rule(EntityKind::Triangle, 0);
    let mut worst: f64 = 0.0;
    for (f, face) in p.mesh.faces.iter().enumerate() {
        if face.kind != FaceKind::Interface {
            continue;
        }
        let ins = face.neighbor.unwrap().0;
        let n = face.normal.map(C64::from);
        for (x, _) in crate::assembly::face_points(p.mesh, f, &rule) {
            let h = (exact.h)(face.owner, &x).h;
            let w = exact.w(p.rho, ins, &x);
            worst = worst.max((h - w).cross(&n).norm() / h.norm().max(1.0));
        }
    }
    worst
}

/// Tolerance on the transmission defect.
pub const TRANSMISSION_TOL: f64 = 1e-10;

/// Generalized loads so that the exact solution satisfies the discrete
/// equations up to the approximation error.
pub fn mms_sources<'a>(p: &'a Problem<'a>, exact: &'a ExactSolution<'a>) -> Result<SourceBundle<'a>, MmsError> {
    let d = transmission_defect(p, exact);
    if d > TRANSMISSION_TOL {
        return Err(MmsError::Transmission(d));
    }
    let iw = C64::new(0.0, p.omega);
    let f_c = move |cell: usize, x: &Point| {
        let h = (exact.h)(cell, x);
        h.h * (iw * p.mu[cell]) + h.curl_curl / C64::from(p.sigma[cell])
    };
    let mut src = SourceBundle {
        f_i: Some(Box::new(move |cell, x| -iw * p.mu0 * (exact.psi)(cell, x).lap)),
        gamma_flux: Some(Box::new(move |f, x| {
            let face = &p.mesh.faces[f];
            let (c, i) = (face.owner, face.neighbor.unwrap().0);
            let n = face.normal.map(C64::from);
            let h = (exact.h)(c, x).h;
            let w = exact.w(p.rho, i, x);
            -f_c(c, x).dot(&n) + iw * (h * C64::from(p.mu[c]) - w * C64::from(p.mu0)).dot(&n)
        })),
        face_flux: Some(Box::new(move |f, x| {
            let face = &p.mesh.faces[f];
            let n = face.normal.map(C64::from);
            let jump = exact.w(p.rho, face.owner, x) - exact.w(p.rho, face.neighbor.unwrap().0, x);
            iw * p.mu0 * jump.dot(&n)
        })),
        sigma_trace: (!exact.satisfies_sigma)
            .then(|| Box::new(move |f: usize, x: &Point| (exact.psi)(p.mesh.faces[f].owner, x).psi) as _),
        f_c: Some(Box::new(f_c)),
        g: C64::new(0.0, 0.0),
    };
    if p.space.k_dof.is_some() {
        src.g = k_load(p, exact);
    }
    Ok(src)
}

/// `ıωμ₀(∇ψ + kρ, ρ) − Σ_Γ ∫ σ⁻¹ curl h · (ρ × n_Γ)`.
fn k_load(p: &Problem, exact: &ExactSolution) -> C64 {
    let mesh = p.mesh;
    let vrule = p.rule(EntityKind::Tetrahedron, 2);
    let mut g = C64::new(0.0, 0.0);
    for cell in 0..mesh.n_cells() {
        if !p.has_k(cell) {
            continue;
        }
        let geo = &mesh.geometry[cell];
        let rho = p.rho.rho[cell].map(C64::from);
        for q in 0..vrule.len() {
            let r = vrule.reference(q);
            let x = geo.to_physical(&Point::new(r[0], r[1], r[2]));
            g += exact.w(p.rho, cell, &x).dot(&rho) * C64::new(0.0, p.omega * p.mu0 * vrule.weights[q] * geo.det);
        }
    }
    let frule = p.rule(EntityKind::Triangle, 2);
    for (f, face) in mesh.faces.iter().enumerate() {
        if face.kind != FaceKind::Interface {
            continue;
        }
        let ins = face.neighbor.unwrap().0;
        if !p.has_k(ins) {
            continue;
        }
        let rn = p.rho.rho[ins].cross(&face.normal).map(C64::from);
        for (x, w) in crate::assembly::face_points(mesh, f, &frule) {
            let e = (exact.h)(face.owner, &x).curl / C64::from(p.sigma[face.owner]);
            g -= e.dot(&rn) * w;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_is_gradient_of_angle_outside_core() {
        for x in [Point::new(0.1, 0.05, 0.3), Point::new(1.2, -0.3, 0.1), Point::new(0.0, 0.6, 0.5)] {
            let g = torus_angle(&x).g;
            let v = torus_vortex(&x);
            assert!((Point::new(v[0].v, v[1].v, v[2].v) - g).norm() < 1e-12);
            assert!(curl(&v).norm() < 1e-10);
        }
    }

    #[test]
    fn unknown_name() {
        let m = crate::fixtures::unit_cube();
        let f = HarmonicField::zero(&m);
        assert!(matches!(build_exact("nope", &m, &f, 1), Err(MmsError::Unknown(_))));
        assert!(matches!(build_exact("torus_circulation", &m, &f, 1), Err(MmsError::Unavailable(..))));
    }
}
