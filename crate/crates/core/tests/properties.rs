use fneighbors::exact::{self, barycentric2, combine2, orient2d, q_frac, Point2};
use fneighbors::generate::MapKind;
use fneighbors::pipeline::{run_pipeline, GeneratorSpec, RunConfig, Stage};
use proptest::prelude::*;

fn rational_point() -> impl Strategy<Value = Point2> {
    ((-50i64..50, 1i64..8), (-50i64..50, 1i64..8)).prop_map(|((a, b), (c, d))| [q_frac(a, b), q_frac(c, d)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn float_filter_never_contradicts_exact(a in rational_point(), b in rational_point(), c in rational_point()) {
        let f = [&a, &b, &c].map(exact::p2_to_f64);
        if let Some(s) = exact::orient2d_f64(f[0], f[1], f[2]) {
            prop_assert_eq!(s, orient2d(&a, &b, &c));
        }
        prop_assert_eq!(exact::sign(&exact::orient2d_value(&a, &b, &c)), orient2d(&a, &b, &c));
    }

    #[test]
    fn barycentric_weights_reproduce_the_point(p in rational_point(), a in rational_point(), b in rational_point(), c in rational_point()) {
        prop_assume!(orient2d(&a, &b, &c) != 0);
        let w = barycentric2(&p, &a, &b, &c).unwrap();
        prop_assert_eq!(&w[0] + &w[1] + &w[2], exact::q(1));
        prop_assert_eq!(combine2(&w, [&a, &b, &c]), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_instances_satisfy_complex_invariants(points in 5usize..10, seed in 0u64..10_000, projection in any::<bool>()) {
        let kind = if projection { MapKind::Projection } else { MapKind::RandomImages };
        let cfg = RunConfig { generator: Some(GeneratorSpec { kind, seed, points }), ..RunConfig::default() };
        let run = run_pipeline(&cfg, Stage::Complex);
        prop_assert!(run.ok(), "{:?}", run.error);
        let cx = run.report.complex.as_ref().unwrap();
        prop_assert!(cx.counting_identity);
        prop_assert!(cx.edge_cases.passed());
        let res = run.report.resolution.as_ref().unwrap();
        prop_assert!(res.single_link_cycles);
        prop_assert!(res.swap_involution);
        let chi: i64 = res.components.iter().map(|c| c.euler).sum();
        prop_assert_eq!(chi, res.vertices as i64 - res.edges as i64 + res.triangles as i64);
        prop_assert!(res.components.iter().any(|c| c.degree_mod2 == 1));
    }
}
