use eddydg::analysis::{check_coercivity, complex_gaussian, dg_norm, dg_norm_matrix, eoc, rng};
use eddydg::assembly::{assemble_ah, assemble_form, Form, Materials, Penalties};
use eddydg::basis::LagrangeBasis;
use eddydg::cohomology::Topology;
use eddydg::config::{apply_overrides, RunConfig};
use eddydg::fespace::C64;
use eddydg::fixtures::{cube_fixture, cube_in_box, torus_fixture};
use eddydg::jet::{curl, Jet};
use eddydg::mesh::Point;
use eddydg::msh::{parse_msh, write_msh, MshOptions};
use eddydg::pipeline::Setup;
use eddydg::quadrature::{quadrature, EntityKind};
use eddydg::sparse::CscMatrix;
use proptest::prelude::*;

fn fact(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

proptest! {
    #[test]
    fn sparse_matches_dense(
        trip in prop::collection::vec((0usize..6, 0usize..6, -5.0f64..5.0, -5.0f64..5.0), 0..40),
        x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
    ) {
        let t: Vec<(usize, usize, C64)> = trip.iter().map(|&(r, c, a, b)| (r, c, C64::new(a, b))).collect();
        let a = CscMatrix::from_triplets(6, &t);
        let mut dense = [[C64::new(0.0, 0.0); 6]; 6];
        for &(r, c, v) in &t {
            dense[r][c] += v;
        }
        let x: Vec<C64> = x.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let y = a.matvec(&x);
        for r in 0..6 {
            let want: C64 = (0..6).map(|c| dense[r][c] * x[c]).sum();
            prop_assert!((y[r] - want).norm() < 1e-12);
            for c in 0..6 {
                prop_assert!((a.get(r, c) - dense[r][c]).norm() < 1e-12);
            }
        }
        let xay: C64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        prop_assert!((a.bilinear(&x, &x) - xay).norm() < 1e-12);
    }

    #[test]
    fn tet_quadrature_is_exact(a in 0u32..5, b in 0u32..5, c in 0u32..5) {
        let deg = (a + b + c) as usize;
        let q = quadrature(EntityKind::Tetrahedron, deg).unwrap();
        let got: f64 = (0..q.len())
            .map(|i| {
                let r = q.reference(i);
                q.weights[i] * r[0].powi(a as i32) * r[1].powi(b as i32) * r[2].powi(c as i32)
            })
            .sum();
        let want = fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
        prop_assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn lagrange_partition_of_unity(m in 1usize..4, l in prop::array::uniform4(0.0f64..1.0)) {
        let s: f64 = l.iter().sum();
        let xi = Point::new(l[1] / s, l[2] / s, l[3] / s);
        let b = LagrangeBasis::new(m);
        let mut v = vec![0.0; b.len()];
        let mut g = vec![Point::zeros(); b.len()];
        b.eval(&xi, &mut v, &mut g);
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(g.iter().sum::<Point>().norm() < 1e-10);
    }

    #[test]
    fn curl_of_gradient_vanishes(c in prop::array::uniform4(-2.0f64..2.0), x in prop::array::uniform3(-1.0f64..1.0)) {
        let p = Point::new(x[0], x[1], x[2]);
        let [u, v, w] = Jet::vars(&p);
        let f = (u * v).scale(c[0]) + w.sin().scale(c[1]) + (u * w).cos().scale(c[2]) + v.powi(3).scale(c[3]);
        let g = [
            Jet { v: f.g.x, g: f.h.column(0).into(), h: Default::default() },
            Jet { v: f.g.y, g: f.h.column(1).into(), h: Default::default() },
            Jet { v: f.g.z, g: f.h.column(2).into(), h: Default::default() },
        ];
        prop_assert!(curl(&g).norm() < 1e-12);
    }

    #[test]
    fn eoc_recovers_power_law(p in 0.5f64..3.0, c in 0.1f64..10.0) {
        let hs = [0.5, 0.25, 0.125];
        let e: Vec<f64> = hs.iter().map(|h: &f64| c * h.powf(p)).collect();
        for r in eoc(&e, &hs).unwrap() {
            prop_assert!((r - p).abs() < 1e-10);
        }
    }

    #[test]
    fn degree_override_round_trips(m in 1usize..=3, sigma in 1e-3f64..1e8) {
        let args = vec!["--degree".to_string(), m.to_string(), "--sigma".to_string(), format!("{sigma:e}")];
        let c = RunConfig::parse("", &args, None).unwrap();
        prop_assert_eq!(c.degree, m);
        prop_assert_eq!(c.materials.default_sigma, Some(sigma));
    }

    #[test]
    fn nonpositive_sigma_is_rejected(sigma in -1e3f64..=0.0) {
        let mut t = toml::Table::new();
        apply_overrides(&mut t, &["--sigma".into(), format!("{sigma:e}")]).unwrap();
        let e = RunConfig::from_table(&t, None).unwrap_err().to_string();
        prop_assert!(e.contains("sigma"), "{}", e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn operator_is_symmetric_for_any_materials(
        omega in 0.1f64..10.0, mu in 0.1f64..10.0, mu0 in 0.1f64..10.0, sigma in 0.1f64..100.0, scale in 0.5f64..4.0,
    ) {
        let s = Setup::new(cube_in_box(1.0, 0.5, 4).unwrap(), 1, Topology::Auto, None).unwrap();
        let p = s.problem(&Materials::uniform(omega, mu, mu0, sigma), Penalties::default_for(1).scaled(scale)).unwrap();
        prop_assert!(assemble_ah(&p).max_asymmetry() < 1e-12);
    }

    #[test]
    fn coercive_on_random_vectors(seed in any::<u64>()) {
        let s = Setup::new(torus_fixture(1), 1, Topology::Auto, None).unwrap();
        let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), Penalties::default_for(1)).unwrap();
        let r = check_coercivity(&assemble_ah(&p), &assemble_form(&p, Form::Norm), 5, seed);
        prop_assert!(r.passed, "min ratio {}", r.min_ratio);
    }

    #[test]
    fn norm_matrix_matches_evaluator(seed in any::<u64>()) {
        let s = Setup::new(cube_fixture(1), 1, Topology::Auto, None).unwrap();
        let p = s.problem(&Materials::uniform(1.0, 1.0, 1.0, 1.0), Penalties::default_for(1)).unwrap();
        let x = complex_gaussian(&mut rng(seed), p.n());
        let a = dg_norm(&p, &x).total();
        let b = dg_norm_matrix(&assemble_form(&p, Form::Norm), &x);
        prop_assert!((a - b).abs() <= 1e-9 * a, "{} vs {}", a, b);
    }
}

#[test]
fn msh_round_trip_preserves_entities() {
    let m = torus_fixture(1);
    let back = parse_msh(&write_msh(&m), &MshOptions::default()).unwrap();
    assert_eq!(back.n_cells(), m.n_cells());
    assert_eq!(back.faces.len(), m.faces.len());
    assert_eq!(back.interface_edges.len(), m.interface_edges.len());
    assert_eq!(back.cells.iter().map(|c| c.region).collect::<Vec<_>>(), m.cells.iter().map(|c| c.region).collect::<Vec<_>>());
}
