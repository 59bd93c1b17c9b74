use std::path::PathBuf;

use eddydg::fixtures::{cube_fixture, torus_fixture};
use eddydg::mesh::Mesh;
use eddydg::msh::{load_msh, write_msh, MshOptions};

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn check(name: &str, mesh: Mesh) {
    let p = path(name);
    if std::env::var_os("EDDYDG_WRITE_FIXTURES").is_some() {
        std::fs::write(&p, write_msh(&mesh)).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&p).unwrap(), write_msh(&mesh), "{name} is stale");
    let back = load_msh(&p, &MshOptions::default()).unwrap();
    assert_eq!(back.n_cells(), mesh.n_cells());
    assert_eq!(back.interface_edges.len(), mesh.interface_edges.len());
}

#[test]
fn cube_level_one() {
    check("cube_l1.msh", cube_fixture(1));
}

#[test]
fn torus_level_one() {
    check("torus_l1.msh", torus_fixture(1));
}
