//! Structured tetrahedral meshes: tensor grids of boxes, each split into six
//! tetrahedra around its main diagonal.

use crate::mesh::{Cell, Mesh, MeshError, MeshOptions, Point, Region};

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Tensor-product grid; `region` sees the centre of each box.
pub fn tensor_grid(
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    region: impl Fn(&Point) -> Region,
    opts: &MeshOptions,
) -> Result<Mesh, MeshError> {
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());
    let id = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut vertices = Vec::with_capacity(nx * ny * nz);
    for &z in zs {
        for &y in ys {
            for &x in xs {
                vertices.push(Point::new(x, y, z));
            }
        }
    }
    let mut cells = Vec::new();
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let c = Point::new((xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0, (zs[k] + zs[k + 1]) / 2.0);
                let r = region(&c);
                let material = match r {
                    Region::Conductor => "conductor",
                    Region::Insulator => "insulator",
                };
                for p in PERMS {
                    let mut ijk = [i, j, k];
                    let mut v = [id(i, j, k); 4];
                    for (s, &axis) in p.iter().enumerate() {
                        ijk[axis] += 1;
                        v[s + 1] = id(ijk[0], ijk[1], ijk[2]);
                    }
                    cells.push(Cell { vertices: v, region: r, material: material.into() });
                }
            }
        }
    }
    Mesh::new(vertices, cells, opts)
}

/// Splits every interval of `lines` into `f` equal parts.
pub fn refine_lines(lines: &[f64], f: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((lines.len() - 1) * f + 1);
    for w in lines.windows(2) {
        for s in 0..f {
            out.push(w[0] + (w[1] - w[0]) * s as f64 / f as f64);
        }
    }
    out.push(*lines.last().unwrap());
    out
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// The unit cube as six tetrahedra, all insulator.
pub fn unit_cube() -> Mesh {
    tensor_grid(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Insulator, &MeshOptions::default())
        .expect("unit cube")
}

/// Two tetrahedra sharing a face, one conductor and one insulator. The conductor
/// touches the outer boundary, so this only loads in lenient mode.
pub fn two_tets() -> Mesh {
    let v = vec![Point::zeros(), Point::x(), Point::y(), Point::z(), Point::new(1.0, 1.0, 1.0)];
    let cells = vec![
        Cell { vertices: [0, 1, 2, 3], region: Region::Conductor, material: "conductor".into() },
        Cell { vertices: [1, 2, 3, 4], region: Region::Insulator, material: "insulator".into() },
    ];
    Mesh::new(v, cells, &MeshOptions { allow_conductor_boundary: true }).expect("two tets")
}

/// Box `[-half_box, half_box]³` with conductor `[-half_core, half_core]³`,
/// `n` cells per axis. The core must align with grid lines.
pub fn cube_in_box(half_box: f64, half_core: f64, n: usize) -> Result<Mesh, MeshError> {
    let xs = uniform(-half_box, half_box, n);
    let aligned = |t: f64| xs.iter().any(|x| (x - t).abs() < 1e-12);
    if !aligned(half_core) || !aligned(-half_core) || half_core >= half_box {
        return Err(MeshError::Topology(format!("core ±{half_core} does not align with {n} cells on ±{half_box}")));
    }
    tensor_grid(
        &xs,
        &xs,
        &xs,
        |c| {
            if c.iter().all(|t| t.abs() < half_core) {
                Region::Conductor
            } else {
                Region::Insulator
            }
        },
        &MeshOptions::default(),
    )
}

/// Refinement levels of the cube-in-box fixture: box `[-1, 1]³`, core
/// `[-1/2, 1/2]³`, `4·level` cells per axis.
pub fn cube_fixture(level: usize) -> Mesh {
    cube_in_box(1.0, 0.5, 4 * level).expect("cube fixture")
}

pub const TORUS_XY: [f64; 6] = [-1.5, -1.0, -0.2, 0.2, 1.0, 1.5];
pub const TORUS_Z: [f64; 4] = [-1.0, -0.4, 0.4, 1.0];

/// Square ring conductor `0.2 ≤ max(|x|, |y|) ≤ 1`, `|z| ≤ 0.4`, inside the box
/// `[-1.5, 1.5]² × [-1, 1]`. Level `f` splits every coarse interval in `f`.
pub fn torus_fixture(level: usize) -> Mesh {
    let xs = refine_lines(&TORUS_XY, level);
    let zs = refine_lines(&TORUS_Z, level);
    tensor_grid(
        &xs,
        &xs,
        &zs,
        |c| {
            let r = c.x.abs().max(c.y.abs());
            if r > 0.2 && r < 1.0 && c.z.abs() < 0.4 {
                Region::Conductor
            } else {
                Region::Insulator
            }
        },
        &MeshOptions::default(),
    )
    .expect("torus fixture")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    Cube,
    Torus,
}

impl Fixture {
    pub fn parse(s: &str) -> Option<Fixture> {
        match s.to_lowercase().as_str() {
            "cube" => Some(Fixture::Cube),
            "torus" => Some(Fixture::Torus),
            _ => None,
        }
    }

    pub fn build(self, level: usize) -> Mesh {
        match self {
            Fixture::Cube => cube_fixture(level),
            Fixture::Torus => torus_fixture(level),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::classify_entities;

    #[test]
    fn unit_cube_counts() {
        let m = unit_cube();
        let s = classify_entities(&m);
        assert_eq!(m.n_cells(), 6);
        assert_eq!(s.sigma.len(), 12);
        assert_eq!(s.interior_insulator.len(), 6);
        assert!(s.interface.is_empty() && s.interior_conductor.is_empty() && s.edges.is_empty());
        let vol: f64 = m.geometry.iter().map(|g| g.volume).sum();
        assert!((vol - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refine() {
        assert_eq!(refine_lines(&[0.0, 1.0, 3.0], 2), vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn misaligned_core() {
        assert!(cube_in_box(1.0, 0.3, 4).is_err());
    }
}
