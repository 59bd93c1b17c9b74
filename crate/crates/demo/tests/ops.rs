use eddydg_demo::{cohomology_json, convergence_json, solve_json};

#[test]
fn torus_has_one_generator() {
    let s = cohomology_json("torus", 1).unwrap();
    assert!(s.contains("\"betti\":1"), "{s}");
    assert!(s.contains("\"passed\":true"), "{s}");
}

#[test]
fn solve_reports_certificate() {
    let s = solve_json("cube", 1, 1, "polynomial_pair").unwrap();
    assert!(s.starts_with("{\"dofs\":"), "{s}");
    assert!(s.contains("\"k\":null"), "{s}");
}

#[test]
fn convergence_has_rows() {
    let s = convergence_json("cube", 1, "gradient_pair").unwrap();
    assert_eq!(s.matches("\"level\"").count(), 2);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(cohomology_json("sphere", 1).is_err());
    assert!(solve_json("cube", 9, 1, "zero").is_err());
    assert!(solve_json("cube", 1, 1, "nope").is_err());
}
