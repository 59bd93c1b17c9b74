//! Second-order forward-mode jets in three variables.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix3;

use crate::mesh::Point;

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: Point,
    pub h: Matrix3<f64>,
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet { v, g: Point::zeros(), h: Matrix3::zeros() }
    }

    /// The coordinate function `x_i` at `x`.
    pub fn var(x: &Point, i: usize) -> Jet {
        let mut g = Point::zeros();
        g[i] = 1.0;
        Jet { v: x[i], g, h: Matrix3::zeros() }
    }

    pub fn vars(x: &Point) -> [Jet; 3] {
        [Jet::var(x, 0), Jet::var(x, 1), Jet::var(x, 2)]
    }

    pub fn laplacian(&self) -> f64 {
        self.h.trace()
    }

    /// `f(self)` given `f`, `f'` and `f''` at the value.
    pub fn chain(&self, f: f64, d1: f64, d2: f64) -> Jet {
        Jet { v: f, g: self.g * d1, h: self.h * d1 + self.g * self.g.transpose() * d2 }
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sqrt(self) -> Jet {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, n: i32) -> Jet {
        if n == 0 {
            return Jet::constant(1.0);
        }
        let nf = n as f64;
        let d2 = if n >= 2 { nf * (nf - 1.0) * self.v.powi(n - 2) } else { 0.0 };
        self.chain(self.v.powi(n), nf * self.v.powi(n - 1), d2)
    }

    pub fn scale(self, s: f64) -> Jet {
        Jet { v: self.v * s, g: self.g * s, h: self.h * s }
    }

    /// `atan2(self, x)`.
    pub fn atan2(self, x: Jet) -> Jet {
        let (a, b) = (self.v, x.v);
        let r2 = a * a + b * b;
        let (fa, fb) = (b / r2, -a / r2);
        let r4 = r2 * r2;
        let (faa, fbb, fab) = (-2.0 * a * b / r4, 2.0 * a * b / r4, (a * a - b * b) / r4);
        let (ga, gb) = (self.g, x.g);
        Jet {
            v: a.atan2(b),
            g: ga * fa + gb * fb,
            h: self.h * fa
                + x.h * fb
                + ga * ga.transpose() * faa
                + (ga * gb.transpose() + gb * ga.transpose()) * fab
                + gb * gb.transpose() * fbb,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, g: self.g + o.g, h: self.h + o.h }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, g: self.g - o.g, h: self.h - o.h }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            g: self.g * o.v + o.g * self.v,
            h: self.h * o.v + o.h * self.v + self.g * o.g.transpose() + o.g * self.g.transpose(),
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet { v: self.v + o, ..self }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        self.scale(o)
    }
}

/// Curl of a vector field given as three component jets.
pub fn curl(f: &[Jet; 3]) -> Point {
    Point::new(f[2].g.y - f[1].g.z, f[0].g.z - f[2].g.x, f[1].g.x - f[0].g.y)
}

/// `curl curl f = ∇(div f) − Δf`.
pub fn curl_curl(f: &[Jet; 3]) -> Point {
    Point::from_fn(|i, _| (0..3).map(|j| f[j].h[(i, j)]).sum::<f64>() - f[i].laplacian())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(&Point) -> Jet, x: Point) {
        let j = f(&x);
        let eps = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            xp[i] += eps;
            let mut xm = x;
            xm[i] -= eps;
            let (jp, jm) = (f(&xp), f(&xm));
            assert!(((jp.v - jm.v) / (2.0 * eps) - j.g[i]).abs() < 1e-6 * (1.0 + j.g.norm()));
            let hd = (jp.g - jm.g) / (2.0 * eps);
            assert!((hd - j.h.column(i)).norm() < 1e-6 * (1.0 + j.h.norm()));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let x = Point::new(0.3, -0.7, 0.45);
        fd_check(|x| { let [a, b, c] = Jet::vars(x); (a * b).sin() + c.cos() * a }, x);
        fd_check(|x| { let [a, b, c] = Jet::vars(x); (a * a + b * b + 0.1).sqrt().recip() * c.powi(3) }, x);
        fd_check(|x| { let [a, b, c] = Jet::vars(x); c.atan2(a + b * 2.0) }, x);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let x = Point::new(0.2, 0.1, -0.4);
        let [a, b, c] = Jet::vars(&x);
        let phi = (a * b).sin() * c;
        let f = [
            Jet { v: phi.g.x, g: phi.h.column(0).into(), h: Matrix3::zeros() },
            Jet { v: phi.g.y, g: phi.h.column(1).into(), h: Matrix3::zeros() },
            Jet { v: phi.g.z, g: phi.h.column(2).into(), h: Matrix3::zeros() },
        ];
        assert!(curl(&f).norm() < 1e-14);
    }
}
