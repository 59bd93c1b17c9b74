use eddydg::analysis::{complex_gaussian, rng};
use eddydg::assembly::{assemble_ah, AssembledSystem, Materials, Penalties};
use eddydg::cohomology::Topology;
use eddydg::fespace::C64;
use eddydg::fixtures::torus_fixture;
use eddydg::pipeline::Setup;
use eddydg::solver::{solve, solve_many, SolverError};

fn system() -> (Setup, Penalties) {
    (Setup::new(torus_fixture(1), 1, Topology::Auto, None).unwrap(), Penalties::default_for(1))
}

#[test]
fn zero_load_gives_exact_zero() {
    let (s, pen) = system();
    let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), pen).unwrap();
    let sys = AssembledSystem { matrix: assemble_ah(&p), rhs: vec![C64::new(0.0, 0.0); p.n()], has_k: true };
    let x = solve(&sys, p.space.n_conductor).unwrap();
    assert!(x.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)));
    assert_eq!(x.k, Some(C64::new(0.0, 0.0)));
}

#[test]
fn solutions_are_linear_and_deterministic() {
    let (s, pen) = system();
    let p = s.problem(&Materials::uniform(2.0, 1.5, 1.0, 3.0), pen).unwrap();
    let mut r = rng(7);
    let b1 = complex_gaussian(&mut r, p.n());
    let b2 = complex_gaussian(&mut r, p.n());
    let a = C64::new(0.3, -1.2);
    let b3: Vec<C64> = b1.iter().zip(&b2).map(|(x, y)| x + a * y).collect();
    let sys = AssembledSystem { matrix: assemble_ah(&p), rhs: Vec::new(), has_k: true };
    let x = solve_many(&sys, &[&b1, &b2, &b3, &b1], p.space.n_conductor).unwrap();
    let scale = x[2].coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for i in 0..p.n() {
        assert!((x[0].coeffs[i] + a * x[1].coeffs[i] - x[2].coeffs[i]).norm() <= 1e-9 * scale);
    }
    assert_eq!(x[0].coeffs, x[3].coeffs);
    assert!(x.iter().all(|s| s.residual <= 1e-10));
}

#[test]
fn wrong_length_is_rejected() {
    let (s, pen) = system();
    let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), pen).unwrap();
    let sys = AssembledSystem { matrix: assemble_ah(&p), rhs: vec![C64::new(1.0, 0.0); 3], has_k: true };
    assert!(matches!(solve(&sys, p.space.n_conductor), Err(SolverError::Dimension { .. })));
}
