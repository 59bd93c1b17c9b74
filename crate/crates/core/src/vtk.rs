//! Legacy ASCII VTK export with cell data.

use std::fmt::Write as _;

use crate::mesh::Mesh;

/// Unstructured grid of the mesh with one scalar array per `(name, values)`.
pub fn write_vtk(mesh: &Mesh, title: &str, cell_data: &[(&str, Vec<f64>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    let n = mesh.n_cells();
    let _ = writeln!(s, "CELLS {} {}", n, 5 * n);
    for c in &mesh.cells {
        let v = c.vertices;
        let _ = writeln!(s, "4 {} {} {} {}", v[0], v[1], v[2], v[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        s.push_str("10\n");
    }
    let _ = writeln!(s, "CELL_DATA {n}");
    let _ = writeln!(s, "SCALARS region int 1\nLOOKUP_TABLE default");
    for c in &mesh.cells {
        let _ = writeln!(s, "{}", u8::from(c.region == crate::mesh::Region::Conductor));
    }
    for (name, vals) in cell_data {
        assert_eq!(vals.len(), n, "cell array '{name}' has the wrong length");
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_counts() {
        let m = crate::fixtures::unit_cube();
        let out = write_vtk(&m, "t", &[("a", vec![1.0; 6])]);
        assert!(out.starts_with("# vtk DataFile Version 3.0\nt\nASCII"));
        assert!(out.contains("CELLS 6 30"));
        assert!(out.contains("SCALARS a double 1"));
        assert_eq!(out.lines().filter(|l| *l == "10").count(), 6);
    }
}
