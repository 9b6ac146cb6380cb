//! Seeded generators for polynomials and matrix tuples, shared by tests,
//! benchmarks and the CLI's `--random` mode.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ncpoly::{Alphabet, MatrixTuple, NcPoly, Rational, Word};

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_int<R: Rng>(rng: &mut R) -> Rational {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-3..=3);
    }
    Rational::from_integer(v.into())
}

pub fn random_word<R: Rng>(rng: &mut R, alphabet: Alphabet, degree: usize) -> Word {
    Word::new(
        (0..degree)
            .map(|_| rng.gen_range(1..=alphabet.size() as u32))
            .collect(),
    )
}

/// Up to `max_terms` terms of degree at most `max_degree`, small integer
/// coefficients. May cancel down to fewer terms.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    alphabet: Alphabet,
    max_degree: usize,
    max_terms: usize,
) -> NcPoly {
    let terms = rng.gen_range(1..=max_terms.max(1));
    NcPoly::from_terms(
        alphabet,
        (0..terms).map(|_| {
            let d = rng.gen_range(0..=max_degree);
            (random_word(rng, alphabet, d), small_int(rng))
        }),
    )
}

/// As [`random_poly`] but never zero, and of degree exactly `degree`.
pub fn random_poly_of_degree<R: Rng>(
    rng: &mut R,
    alphabet: Alphabet,
    degree: usize,
    max_terms: usize,
) -> NcPoly {
    loop {
        let mut p = random_poly(rng, alphabet, degree, max_terms.saturating_sub(1).max(1));
        p.add_term(random_word(rng, alphabet, degree), small_int(rng));
        if p.degree() == Some(degree) {
            return p;
        }
    }
}

/// `r + r*` for a random `r`; nonzero.
pub fn random_symmetric_poly<R: Rng>(
    rng: &mut R,
    alphabet: Alphabet,
    max_degree: usize,
    max_terms: usize,
) -> NcPoly {
    loop {
        let r = random_poly(rng, alphabet, max_degree, max_terms);
        let p = &r + &r.adjoint();
        if !p.is_zero() {
            return p;
        }
    }
}

/// `sum f_i* f_i` over `1..=max_squares` random nonzero `f_i` of degree at
/// most `max_degree`. Returns the sum and the squares.
pub fn random_sos<R: Rng>(
    rng: &mut R,
    alphabet: Alphabet,
    max_degree: usize,
    max_squares: usize,
) -> (NcPoly, Vec<NcPoly>) {
    let count = rng.gen_range(1..=max_squares.max(1));
    let squares: Vec<NcPoly> = (0..count)
        .map(|_| loop {
            let f = random_poly(rng, alphabet, max_degree, 4);
            if !f.is_zero() {
                break f;
            }
        })
        .collect();
    let mut p = NcPoly::zero(alphabet);
    for f in &squares {
        p = &p + &(&f.adjoint() * f);
    }
    (p, squares)
}

/// `n` matrices of side `k`, entries uniform in `[-1, 1]`.
pub fn random_tuple<R: Rng>(rng: &mut R, n: usize, k: usize) -> MatrixTuple {
    MatrixTuple::new(
        (0..n)
            .map(|_| DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..=1.0)))
            .collect(),
    )
    .expect("square matrices of equal size")
}
