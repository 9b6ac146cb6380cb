use nalgebra::DMatrix;
use ncsos::random::{random_sos, rng};
use ncsos::sdp::solve;
use ncsos::sos::{reduce_rank_on_boundary, sdp_problem, SosJson};
use ncsos::{
    build_gram_space, parse, sos_decompose, sos_decompose_with, Alphabet, SolverOptions, SosError,
    SosOptions,
};

fn example_p() -> ncsos::NcPoly {
    parse("1 + x1'*x1 + x1*x1'", None).unwrap()
}

fn rank(x: &DMatrix<f64>) -> usize {
    let e = x.clone().symmetric_eigen().eigenvalues;
    let top = e.max();
    e.iter().filter(|&&v| v > 1e-7 * top).count()
}

#[test]
fn worked_example_is_stable_across_start_points() {
    for k in 0..10 {
        let opts = SosOptions {
            solver: SolverOptions {
                start_scale: 10f64.powf(-1.0 + k as f64 * 2.0 / 9.0),
                ..SolverOptions::default()
            },
            ..SosOptions::default()
        };
        let d = sos_decompose_with(&example_p(), &opts).unwrap();
        assert_eq!(d.squares.len(), 2, "start scale #{k}");
        assert_eq!((d.certificate.lower, d.certificate.upper), (2, Some(2)));
        assert!(d.certificate.certified);
        assert!(d.reconstruction_error <= 1e-9);
        assert!((d.gram.trace() - 3.0).abs() <= 1e-8);
    }
}

#[test]
fn boundary_reduction_stays_in_the_gram_space() {
    let mut r = rng(31);
    for i in 0..30 {
        let a = Alphabet::new(1 + i % 2).unwrap();
        let (p, _) = random_sos(&mut r, a, 2, 3);
        let g = build_gram_space(&p).unwrap();
        let reduced = sdp_problem(&g).expect("feasible");
        let sol = solve(&reduced.problem, &SolverOptions::default());
        let x0 = reduced.embed(&sol.x);
        let x = reduce_rank_on_boundary(&x0, &g, 1e-7);
        let scale = p.max_abs_coeff().max(1.0);
        assert!(
            g.residual(&x) <= 1e-8 * scale,
            "instance {i}: {}",
            g.residual(&x)
        );
        let lam = x.clone().symmetric_eigen().eigenvalues.min();
        assert!(lam >= -1e-8 * scale, "instance {i}: {lam}");
        assert!(rank(&x) <= rank(&x0), "instance {i}");
    }
}

#[test]
fn boundary_reduction_from_the_identity() {
    let g = build_gram_space(&example_p()).unwrap();
    let x = reduce_rank_on_boundary(&DMatrix::identity(3, 3), &g, 1e-7);
    assert_eq!(rank(&x), 2);
    assert!((x.trace() - 3.0).abs() <= 1e-10);
    assert!(g.residual(&x) <= 1e-12);
}

#[test]
fn json_shapes() {
    let d = sos_decompose(&example_p()).unwrap();
    let v = serde_json::to_value(d.to_json()).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["rank_lower"], 2);
    assert_eq!(v["rank_upper"], 2);
    assert_eq!(v["certified"], true);
    assert_eq!(v["squares"].as_array().unwrap().len(), 2);

    let err = sos_decompose(&parse("x1'*x1 - 1", None).unwrap()).unwrap_err();
    assert!(matches!(err, SosError::Infeasible { .. }), "{err:?}");
    let v = serde_json::to_value(SosJson::infeasible(0)).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert!(v["squares"].as_array().unwrap().is_empty());
}
