use std::process::Command;

fn eddydg(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_eddydg")).args(args).env("RUST_LOG", "warn").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn solve_writes_solution_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let (code, err) = eddydg(&["solve", "--fixture", "torus", "--vtk", "true", "--output", o]);
    assert_eq!(code, 0, "{err}");
    let cert = std::fs::read_to_string(dir.path().join("certificate.txt")).unwrap();
    assert!(cert.contains("relative_residual"));
    assert!(cert.contains("k = "));
    let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    assert!(vtk.contains("SCALARS e_magnitude double 1"));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("dof,re,im\n"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\nfixture = \"cube\"\ncurrent = [0.0, 0.0, 1.0]\n[materials]\nomega = 2.0\n").unwrap();
    let o = dir.path().join("out");
    let (code, err) = eddydg(&["solve", "--config", cfg.to_str().unwrap(), "--output", o.to_str().unwrap(), "--degree", "2"]);
    assert_eq!(code, 0, "{err}");
    let cert = std::fs::read_to_string(o.join("certificate.txt")).unwrap();
    assert!(cert.contains("degree = 2"));
}

#[test]
fn verify_passes_on_the_torus() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = eddydg(&["verify", "--fixture", "torus", "--levels", "[1, 2]", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(!report.contains("FAIL"), "{report}");
}

#[test]
fn convergence_writes_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = eddydg(&["convergence", "--levels", "[1, 2]", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert!(csv.starts_with("level,h,dg_error,err_curl,err_l2C,err_gradI,jumpC,jumpI,jumpE,eoc\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let (code, err) = eddydg(&["solve", "--sigma", "0", "--output", o]);
    assert_eq!(code, 2);
    assert!(err.contains("materials.sigma"), "{err}");
    assert_eq!(eddydg(&["explode"]).0, 2);
    assert_eq!(eddydg(&["solve", "--mesh", "/nonexistent.msh", "--output", o]).0, 3);
    assert_eq!(eddydg(&["solve", "--mms", "nope", "--output", o]).0, 2);
}
