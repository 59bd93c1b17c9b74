//! Lagrange bases on the reference tetrahedron with equispaced nodes.

use nalgebra::DMatrix;

use crate::mesh::Point;

#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    pub degree: usize,
    pub exponents: Vec<[usize; 3]>,
    /// Reference coordinates of the nodes.
    pub nodes: Vec<Point>,
    /// Monomial coefficients, one column per basis function.
    pub coeffs: DMatrix<f64>,
}

pub fn dim_p(k: usize) -> usize {
    (k + 1) * (k + 2) * (k + 3) / 6
}

/// Dimension of degree-`k` polynomials on a triangle.
pub fn dim_p2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> LagrangeBasis {
        assert!(degree >= 1, "degree must be positive");
        let mut exponents = Vec::new();
        let mut nodes = Vec::new();
        let kf = degree as f64;
        for s in 0..=degree {
            for c in 0..=s {
                for b in 0..=s - c {
                    let a = s - c - b;
                    exponents.push([a, b, c]);
                }
            }
        }
        for k in 0..=degree {
            for j in 0..=degree - k {
                for i in 0..=degree - k - j {
                    nodes.push(Point::new(i as f64 / kf, j as f64 / kf, k as f64 / kf));
                }
            }
        }
        let n = nodes.len();
        let mut v = DMatrix::<f64>::zeros(n, n);
        for (r, x) in nodes.iter().enumerate() {
            for (c, e) in exponents.iter().enumerate() {
                v[(r, c)] = x.x.powi(e[0] as i32) * x.y.powi(e[1] as i32) * x.z.powi(e[2] as i32);
            }
        }
        let coeffs = v.try_inverse().expect("unisolvent nodes");
        LagrangeBasis { degree, exponents, nodes, coeffs }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Barycentric coordinates of node `i`.
    pub fn node_bary(&self, i: usize) -> [f64; 4] {
        let x = self.nodes[i];
        [1.0 - x.x - x.y - x.z, x.x, x.y, x.z]
    }

    /// Whether node `i` lies on local face `f` (the face opposite vertex `f`).
    pub fn node_on_face(&self, i: usize, f: usize) -> bool {
        self.node_bary(i)[f].abs() < 1e-12
    }

    /// Whether node `i` lies on the edge between local vertices `a` and `b`.
    pub fn node_on_edge(&self, i: usize, a: usize, b: usize) -> bool {
        let l = self.node_bary(i);
        (0..4).filter(|&v| v != a && v != b).all(|v| l[v].abs() < 1e-12)
    }

    /// Values and reference gradients at `xi`.
    pub fn eval(&self, xi: &Point, values: &mut [f64], grads: &mut [Point]) {
        let k = self.degree;
        let mut p = [[1.0f64; 8]; 3];
        for d in 0..3 {
            for e in 1..=k {
                p[d][e] = p[d][e - 1] * xi[d];
            }
        }
        let n = self.len();
        values[..n].iter_mut().for_each(|v| *v = 0.0);
        grads[..n].iter_mut().for_each(|g| *g = Point::zeros());
        for (j, e) in self.exponents.iter().enumerate() {
            let m = p[0][e[0]] * p[1][e[1]] * p[2][e[2]];
            let dx = if e[0] > 0 { e[0] as f64 * p[0][e[0] - 1] * p[1][e[1]] * p[2][e[2]] } else { 0.0 };
            let dy = if e[1] > 0 { e[1] as f64 * p[0][e[0]] * p[1][e[1] - 1] * p[2][e[2]] } else { 0.0 };
            let dz = if e[2] > 0 { e[2] as f64 * p[0][e[0]] * p[1][e[1]] * p[2][e[2] - 1] } else { 0.0 };
            let g = Point::new(dx, dy, dz);
            for i in 0..n {
                let c = self.coeffs[(j, i)];
                if c != 0.0 {
                    values[i] += c * m;
                    grads[i] += g * c;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_and_partition_of_unity() {
        for k in 1..=4 {
            let b = LagrangeBasis::new(k);
            assert_eq!(b.len(), dim_p(k));
            let mut v = vec![0.0; b.len()];
            let mut g = vec![Point::zeros(); b.len()];
            for (i, x) in b.nodes.iter().enumerate() {
                b.eval(x, &mut v, &mut g);
                for (j, vj) in v.iter().enumerate() {
                    assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
            b.eval(&Point::new(0.1, 0.27, 0.33), &mut v, &mut g);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(g.iter().sum::<Point>().norm() < 1e-10);
        }
    }

    #[test]
    fn face_node_counts() {
        let b = LagrangeBasis::new(3);
        for f in 0..4 {
            assert_eq!((0..b.len()).filter(|&i| b.node_on_face(i, f)).count(), dim_p2(3));
        }
        assert_eq!((0..b.len()).filter(|&i| b.node_on_edge(i, 1, 3)).count(), 4);
    }
}
