//! Collapsed Gauss–Jacobi rules on the reference segment, triangle and
//! tetrahedron.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub const MAX_DEGREE: usize = 31;

#[derive(Debug, Error)]
#[error("quadrature degree {0} exceeds the supported maximum {MAX_DEGREE}")]
pub struct UnsupportedDegree(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityKind {
    Segment,
    Triangle,
    Tetrahedron,
}

impl EntityKind {
    pub fn dim(self) -> usize {
        match self {
            EntityKind::Segment => 1,
            EntityKind::Triangle => 2,
            EntityKind::Tetrahedron => 3,
        }
    }

    pub fn measure(self) -> f64 {
        match self {
            EntityKind::Segment => 1.0,
            EntityKind::Triangle => 0.5,
            EntityKind::Tetrahedron => 1.0 / 6.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub kind: EntityKind,
    /// Barycentric coordinates, `dim + 1` per point.
    pub bary: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.kind.dim() + 1;
        &self.bary[i * s..(i + 1) * s]
    }

    /// Reference coordinates (the barycentric entries after the first).
    pub fn reference(&self, i: usize) -> &[f64] {
        &self.point(i)[1..]
    }
}

/// Gauss–Jacobi nodes and weights on `[0, 1]` for the weight `(1 - t)^alpha`.
pub fn gauss_jacobi(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let b = 0.0;
    let a = alpha;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jm[(k, k)] = if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let off = (4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    // Integral of (1 - x)^a over [-1, 1] for integer a, times the map to [0, 1].
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);
    let eig = SymmetricEigen::new(jm);
    let mut pw: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            ((x + 1.0) / 2.0, mu0 * v0 * v0 / 2f64.powf(a + 1.0))
        })
        .collect();
    pw.sort_by(|p, q| p.0.total_cmp(&q.0));
    (pw.iter().map(|p| p.0).collect(), pw.iter().map(|p| p.1).collect())
}

/// A rule on `kind` exact for polynomials of total degree `degree`.
pub fn quadrature(kind: EntityKind, degree: usize) -> Result<QuadratureRule, UnsupportedDegree> {
    if degree > MAX_DEGREE {
        return Err(UnsupportedDegree(degree));
    }
    let n = degree / 2 + 1;
    let mut bary = Vec::new();
    let mut weights = Vec::new();
    match kind {
        EntityKind::Segment => {
            let (t, w) = gauss_jacobi(n, 0.0);
            for i in 0..n {
                bary.extend_from_slice(&[1.0 - t[i], t[i]]);
                weights.push(w[i]);
            }
        }
        EntityKind::Triangle => {
            let (t1, w1) = gauss_jacobi(n, 0.0);
            let (t2, w2) = gauss_jacobi(n, 1.0);
            for j in 0..n {
                for i in 0..n {
                    let y = t2[j];
                    let x = t1[i] * (1.0 - y);
                    bary.extend_from_slice(&[1.0 - x - y, x, y]);
                    weights.push(w1[i] * w2[j]);
                }
            }
        }
        EntityKind::Tetrahedron if degree <= 1 => {
            bary.extend_from_slice(&[0.25; 4]);
            weights.push(1.0 / 6.0);
        }
        EntityKind::Tetrahedron => {
            let (t1, w1) = gauss_jacobi(n, 0.0);
            let (t2, w2) = gauss_jacobi(n, 1.0);
            let (t3, w3) = gauss_jacobi(n, 2.0);
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let z = t3[k];
                        let y = t2[j] * (1.0 - z);
                        let x = t1[i] * (1.0 - t2[j]) * (1.0 - z);
                        bary.extend_from_slice(&[1.0 - x - y - z, x, y, z]);
                        weights.push(w1[i] * w2[j] * w3[k]);
                    }
                }
            }
        }
    }
    Ok(QuadratureRule { kind, bary, weights, degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of x^a y^b z^c over the reference simplex.
    pub fn monomial_integral(e: &[u32]) -> f64 {
        let s: u32 = e.iter().sum();
        e.iter().map(|&k| fact(k)).product::<f64>() / fact(s + e.len() as u32)
    }

    #[test]
    fn tet_degree_one_is_centroid() {
        let q = quadrature(EntityKind::Tetrahedron, 1).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.weights[0] - 1.0 / 6.0).abs() < 1e-16);
        assert!(q.point(0).iter().all(|&l| (l - 0.25).abs() < 1e-16));
    }

    #[test]
    fn triangle_weights() {
        let q = quadrature(EntityKind::Triangle, 2).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn x2y_on_tet() {
        let q = quadrature(EntityKind::Tetrahedron, 3).unwrap();
        let v: f64 = (0..q.len())
            .map(|i| {
                let r = q.reference(i);
                q.weights[i] * r[0] * r[0] * r[1]
            })
            .sum();
        assert!((monomial_integral(&[2, 1, 0]) - 1.0 / 360.0).abs() < 1e-18);
        assert!((v - 1.0 / 360.0).abs() < 1e-17);
    }

    #[test]
    fn too_high() {
        assert!(quadrature(EntityKind::Triangle, MAX_DEGREE + 1).is_err());
    }
}
