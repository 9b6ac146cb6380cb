use ncsos::random::{random_poly, random_tuple, rng};
use ncsos::theorems::{leading_words_distinct, shifted_leading_words, theorem_bound};
use ncsos::{
    build_gram_space, commutes, evaluate, make_s, parse, rank_lower_bound, verify_power_bound,
    verify_qqs_bound, verify_qsq_bound, Alphabet, NcPoly, QqsOutcome, Rational,
};

fn nonzero_q(seed: u64, n: usize) -> Vec<NcPoly> {
    let mut r = rng(seed);
    let a = Alphabet::new(n).unwrap();
    let mut out = Vec::new();
    while out.len() < 30 {
        let q = random_poly(&mut r, a, 2, 4);
        if !q.is_zero() {
            out.push(q);
        }
    }
    out
}

fn qsq_cell(n: usize, d: usize) {
    let bound = theorem_bound(n, d).unwrap();
    for (i, q) in nonzero_q(1000 + 10 * n as u64 + d as u64, n)
        .iter()
        .enumerate()
    {
        let report = verify_qsq_bound(q, d).unwrap();
        assert_eq!(report.bound, bound);
        assert!(
            report.satisfied,
            "q #{i} = {q}: lower {} < {bound}",
            report.lower
        );
    }
}

#[test]
fn qsq_bound_n1_d1() {
    qsq_cell(1, 1);
}

#[test]
fn qsq_bound_n1_d2() {
    qsq_cell(1, 2);
}

#[test]
fn qsq_bound_n2_d1() {
    qsq_cell(2, 1);
}

#[test]
fn qsq_bound_n2_d2() {
    qsq_cell(2, 2);
}

#[test]
fn s_has_unit_symmetric_pairs() {
    for (n, d) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 2)] {
        let s = make_s(n, d).unwrap().poly;
        let a = s.alphabet();
        assert_eq!(s.num_terms(), theorem_bound(n, d).unwrap());
        assert!(s.is_symmetric());
        let one = Rational::from_integer(1.into());
        for alpha in a.words_of_degree(d) {
            assert_eq!(s.coeff(&alpha.adjoint(a).concat(&alpha)), one);
        }
        // The exact lower bound of S itself is attained.
        let g = build_gram_space(&s).unwrap();
        assert_eq!(rank_lower_bound(&g), theorem_bound(n, d).unwrap());
    }
}

#[test]
fn s_is_positive_on_random_tuples() {
    let mut r = rng(5);
    for (n, d) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let s = make_s(n, d).unwrap().poly;
        for k in 1..=4 {
            for _ in 0..10 {
                let m = evaluate(&s, &random_tuple(&mut r, n, k)).unwrap();
                let lam = m.symmetric_eigen().eigenvalues.min();
                assert!(lam >= -1e-9, "n {n} d {d} k {k}: {lam}");
            }
        }
    }
}

#[test]
fn shifted_q_have_distinct_leading_words() {
    for n in [1, 2] {
        for d in [1, 2] {
            for q in nonzero_q(77 + n as u64, n) {
                assert!(leading_words_distinct(&q, d), "{q}, d = {d}");
                let lead = q.leading_term().unwrap().0.clone();
                for (alpha, w) in q
                    .alphabet()
                    .words_of_degree(d)
                    .iter()
                    .zip(shifted_leading_words(&q, d))
                {
                    assert_eq!(w, alpha.concat(&lead));
                }
            }
        }
    }
}

#[test]
fn qqs_family() {
    let s = make_s(1, 1).unwrap().poly;
    match verify_qqs_bound(&s, 1).unwrap() {
        QqsOutcome::Applicable(r) => assert!(r.satisfied && r.lower >= 2),
        other => panic!("{other:?}"),
    }
    match verify_qqs_bound(&parse("x1", Some(1)).unwrap(), 1).unwrap() {
        QqsOutcome::NotApplicable {
            witness_word,
            witness_coeff,
            ..
        } => {
            assert!(!witness_word.is_empty());
            assert_ne!(witness_coeff, "0");
        }
        other => panic!("{other:?}"),
    }
    match verify_qqs_bound(&parse("-2/3", Some(1)).unwrap(), 1).unwrap() {
        QqsOutcome::Applicable(r) => assert_eq!(r.lower, 2),
        other => panic!("{other:?}"),
    }
    // Random q: applicability is exactly the commutation test.
    for q in nonzero_q(3, 1) {
        let qq = &q.adjoint() * &q;
        let applicable = matches!(verify_qqs_bound(&q, 1).unwrap(), QqsOutcome::Applicable(_));
        assert_eq!(applicable, commutes(&qq, &s), "{q}");
    }
}

#[test]
fn odd_powers() {
    for (n, bound) in [(1, 2), (2, 4)] {
        let r = verify_power_bound(3, n, 1).unwrap();
        assert_eq!(r.bound, bound);
        assert!(r.lower >= bound && r.satisfied);
    }
    assert_eq!(verify_power_bound(1, 1, 1).unwrap().lower, 2);
    assert!(verify_power_bound(5, 1, 1).unwrap().satisfied);
}
