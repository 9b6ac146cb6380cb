use nalgebra::{DMatrix, DVector};
use ncsos::gram::{quadratic_form, top_block};
use ncsos::random::{random_symmetric_poly, rng};
use ncsos::{build_gram_space, parse, rank_lower_bound, Alphabet, GramSpace, NcPoly, Rational};
use rand::Rng;

fn random_spaces(count: usize, seed: u64) -> Vec<(NcPoly, GramSpace)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = r.gen_range(1..=2);
        let p = random_symmetric_poly(&mut r, Alphabet::new(n).unwrap(), 4, 6);
        // Odd top degree has no Gram representation; skip those draws.
        if let Ok(g) = build_gram_space(&p) {
            out.push((p, g));
        }
    }
    out
}

#[test]
fn kernel_matrices_vanish_on_the_top_block() {
    for (p, g) in random_spaces(100, 11) {
        let offset = g.basis().top_offset();
        for a in g.kernel_basis() {
            for (&(i, j), v) in a.entries() {
                assert!(
                    i < offset || j < offset || v == &Rational::from_integer(0.into()),
                    "{p}: kernel entry ({i},{j}) = {v} in the top block"
                );
            }
        }
    }
}

#[test]
fn every_point_reconstructs_p_and_shares_the_top_block() {
    let mut r = rng(12);
    for (p, g) in random_spaces(40, 13) {
        let basis = g.basis();
        assert_eq!(quadratic_form(basis, &g.representative().to_dense()), p);
        for a in g.kernel_basis() {
            assert!(quadratic_form(basis, &a.to_dense()).is_zero());
        }
        let t: Vec<Rational> = (0..g.kernel_dim())
            .map(|_| Rational::new(r.gen_range(-9..=9).into(), r.gen_range(1..=5).into()))
            .collect();
        let m = g.point(&t);
        assert!(m.is_symmetric());
        assert_eq!(quadratic_form(basis, &m), p);
        let size = basis.top_size();
        let offset = basis.top_offset();
        assert_eq!(m.submatrix(offset, offset, size, size), top_block(&g));
    }
}

#[test]
fn kernel_basis_is_independent() {
    for (_, g) in random_spaces(20, 14) {
        let n = g.dim();
        let k = g.kernel_dim();
        if k == 0 {
            continue;
        }
        let rows: Vec<Vec<Rational>> = g
            .kernel_basis()
            .iter()
            .map(|a| {
                let d = a.to_dense();
                (0..n)
                    .flat_map(|i| (i..n).map(move |j| (i, j)))
                    .map(|(i, j)| d[(i, j)].clone())
                    .collect()
            })
            .collect();
        assert_eq!(ncsos::linalg::RatMatrix::from_rows(rows).rank(), k);
    }
}

/// Independent oracle for `p = x1'*x1`: expand `V* M V` over the basis
/// `(1, x1, x1')` by hand-built words, solve the weighted minimum-norm
/// problem with a float SVD, and compare.
#[test]
fn gram_oracle_for_x_star_x() {
    // Letters: 1 = x1, 2 = x1'. Basis words as letter lists.
    let basis: [&[u32]; 3] = [&[], &[1], &[2]];
    let star = |w: &[u32]| -> Vec<u32> { w.iter().rev().map(|&l| 3 - l).collect() };
    let cells: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
    let mut words: Vec<Vec<u32>> = Vec::new();
    let mut entries = Vec::new();
    for (c, &(i, j)) in cells.iter().enumerate() {
        let pairs = if i == j {
            vec![(i, j)]
        } else {
            vec![(i, j), (j, i)]
        };
        for (a, b) in pairs {
            let mut w = star(basis[a]);
            w.extend_from_slice(basis[b]);
            let row = words.iter().position(|x| *x == w).unwrap_or_else(|| {
                words.push(w.clone());
                words.len() - 1
            });
            entries.push((row, c));
        }
    }
    assert_eq!(words.len(), 7);
    let mut a = DMatrix::<f64>::zeros(7, 6);
    for (row, c) in entries {
        a[(row, c)] += 1.0;
    }
    let b = DVector::from_iterator(
        7,
        words.iter().map(|w| if *w == [2, 1] { 1.0 } else { 0.0 }),
    );
    // Frobenius weights: off-diagonal cells count twice; substitute u = sqrt(w) m.
    let sw: Vec<f64> = cells
        .iter()
        .map(|&(i, j)| if i == j { 1.0 } else { 2f64.sqrt() })
        .collect();
    let scaled = DMatrix::from_fn(7, 6, |r, c| a[(r, c)] / sw[c]);
    let svd = scaled.clone().svd(true, true);
    let u = svd.solve(&b, 1e-12).unwrap();
    let nullity = 6 - svd.singular_values.iter().filter(|&&s| s > 1e-12).count();

    let g = build_gram_space(&parse("x1'*x1", None).unwrap()).unwrap();
    let m0 = g.representative().to_f64();
    for (c, &(i, j)) in cells.iter().enumerate() {
        assert!((m0[(i, j)] - u[c] / sw[c]).abs() < 1e-12);
    }
    assert_eq!(
        m0,
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 0.0]))
    );
    assert_eq!(g.kernel_dim(), nullity);
    assert_eq!(nullity, 1);
}

#[test]
fn block_rank_examples() {
    let s = parse("x1'*x1 + x1*x1'", None).unwrap();
    let g = build_gram_space(&s).unwrap();
    assert_eq!(top_block(&g), ncsos::linalg::RatMatrix::identity(2));
    assert_eq!(rank_lower_bound(&g), 2);

    // q* S q with q = x1: 4x4 block over degree-2 words, rank 2.
    let q = parse("x1", None).unwrap();
    let p = &(&q.adjoint() * &s) * &q;
    let g = build_gram_space(&p).unwrap();
    assert_eq!(top_block(&g).nrows(), 4);
    assert_eq!(rank_lower_bound(&g), 2);

    let q = parse("1 + x1", None).unwrap();
    let g = build_gram_space(&(&(&q.adjoint() * &s) * &q)).unwrap();
    assert!(rank_lower_bound(&g) >= 2);
}
