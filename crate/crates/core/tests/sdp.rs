use nalgebra::DMatrix;
use ncsos::linalg::{max_abs, min_eigenvalue};
use ncsos::random::rng;
use ncsos::sdp::{solve, Constraint, SdpProblem, SdpStatus, SolverOptions};
use ncsos::{build_gram_space, max_step_to_boundary, parse};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_sym(r: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| r.gen_range(-1.0..=1.0));
    (&a + a.transpose()) * 0.5
}

fn random_psd(r: &mut ChaCha8Rng, m: usize, rank: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(rank, m, |_, _| r.gen_range(-1.0..=1.0));
    b.transpose() * b
}

/// An instance with a planted optimum: `X*` of rank `r`, `Z* ⪰ 0` on the
/// orthogonal complement, `C = A^T y* + Z*`, `b = A(X*)`. With exactly
/// `r(r+1)/2 + r(m-r)` constraints (the tangent dimension of the rank-`r`
/// manifold) the optimum is generically unique, nondegenerate and strictly
/// complementary, so `X*` is the answer to first order.
fn planted_instance(seed: u64) -> (SdpProblem, DMatrix<f64>) {
    let mut r = rng(seed);
    let m = r.gen_range(2..=7);
    let rank = r.gen_range(1..m);
    let q = DMatrix::from_fn(m, m, |_, _| r.gen_range(-1.0..=1.0))
        .qr()
        .q();
    let range = q.columns(0, rank).into_owned();
    let null = q.columns(rank, m - rank).into_owned();
    let x_star = &range
        * DMatrix::from_diagonal(&nalgebra::DVector::from_fn(rank, |_, _| {
            r.gen_range(0.5..2.0)
        }))
        * range.transpose();
    let z_star = &null
        * DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m - rank, |_, _| {
            r.gen_range(0.5..2.0)
        }))
        * null.transpose();
    let k = rank * (rank + 1) / 2 + rank * (m - rank);
    let mut c = z_star;
    let constraints = (0..k)
        .map(|_| {
            let a = random_sym(&mut r, m);
            c += &a * r.gen_range(-1.0..=1.0);
            Constraint::from_dense(&a, a.dot(&x_star))
        })
        .collect();
    (
        (SdpProblem::new((&c + c.transpose()) * 0.5, constraints).unwrap()),
        x_star,
    )
}

#[test]
fn weak_duality_and_feasibility_contract() {
    let opts = SolverOptions::default();
    for seed in 0..40 {
        let (prob, x_star) = planted_instance(seed);
        let sol = solve(&prob, &opts);
        assert_eq!(sol.status, SdpStatus::Optimal, "instance {seed}");
        assert!(max_abs(&(&sol.x - &x_star)) <= 1e-6, "instance {seed}");
        assert!(
            sol.objective >= sol.dual_objective - 1e-6,
            "instance {seed}"
        );
        assert!(sol.primal_residual <= opts.feas_tol);
        assert!(sol.eigenvalue_floor >= -opts.psd_tol);
        for c in prob.constraints() {
            assert!((c.inner(&sol.x) - c.rhs).abs() <= opts.feas_tol);
        }
    }
}

#[test]
fn scaling_the_constraints_leaves_the_optimizer_unchanged() {
    let opts = SolverOptions::default();
    for seed in 100..120 {
        let (prob, _) = planted_instance(seed);
        let base = solve(&prob, &opts);
        for gamma in [0.1, 10.0] {
            let scaled = solve(&prob.scale_constraints(gamma), &opts);
            assert_eq!(scaled.status, SdpStatus::Optimal);
            assert!(
                max_abs(&(&scaled.x - &base.x)) <= 1e-6,
                "instance {seed}, γ = {gamma}"
            );
        }
    }
}

#[test]
fn trace_is_constant_on_the_worked_example() {
    let g = build_gram_space(&parse("1 + x1'*x1 + x1*x1'", None).unwrap()).unwrap();
    let prob = ncsos::sos::sdp_problem(&g).unwrap().problem;
    let sol = solve(&prob, &SolverOptions::default());
    assert_eq!(sol.status, SdpStatus::Optimal);
    assert!((sol.objective - 3.0).abs() <= 1e-8);
    // Every point I + tM of the space has trace 3.
    let m = g.kernel_basis()[0].to_f64();
    assert_eq!(m.trace(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn boundary_step_lands_on_the_boundary(seed in any::<u64>(), m in 2usize..=6, deficit in 0usize..=2) {
        let mut r = rng(seed);
        let rank = m.saturating_sub(deficit).max(1);
        let x = random_psd(&mut r, m, rank);
        let mut n = random_sym(&mut r, m);
        if deficit > 0 {
            // Stay on the face of x so the step can be positive.
            let (values, vectors) = ncsos::linalg::sym_eigen(&x);
            let top = values.iter().copied().fold(0.0, f64::max);
            let range: Vec<usize> = (0..m).filter(|&k| values[k] > 1e-9 * top).collect();
            let u = vectors.select_columns(&range);
            n = &u * (u.transpose() * &n * &u) * u.transpose();
        }
        let t = max_step_to_boundary(&x, &n);
        prop_assert!(t >= 0.0);
        if t.is_finite() {
            let lam = min_eigenvalue(&(&x + &n * t));
            prop_assert!((-1e-8..=1e-8).contains(&lam), "λ_min = {lam:e}, t = {t}");
        } else {
            prop_assert!(min_eigenvalue(&(&x + &n * 1e6)) >= -1e-6 * 1e6);
        }
    }
}

#[test]
fn example_boundary_step() {
    let i3 = DMatrix::<f64>::identity(3, 3);
    let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -1.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
    assert!((max_step_to_boundary(&i3, &m) - 0.5f64.sqrt()).abs() <= 1e-10);
    assert!((max_step_to_boundary(&i3, &(-&m)) - 0.5f64.sqrt()).abs() <= 1e-10);
}
