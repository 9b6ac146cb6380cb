//! Polynomials in the real free *-algebra generated by `X_1..X_n` and their
//! adjoints `X_1*..X_n*`.
//!
//! Letters are indexed `1..=2n`; index `j + n` stands for `X_j*`. Words are
//! ordered graded-lexicographically (shorter first, then by letter index),
//! which puts every plain variable before every starred one inside a degree
//! class. With `n = 1` the degree-one monomials therefore come out as
//! `(X, X*)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use thiserror::Error;

/// Exact coefficient type.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("alphabet must have at least one variable")]
    EmptyAlphabet,
    #[error("letter {letter} is outside the alphabet 1..={max}")]
    LetterOutOfRange { letter: u32, max: u32 },
    #[error("matrix tuple is empty")]
    EmptyTuple,
    #[error("matrix {index} is {rows}x{cols}, expected {size}x{size}")]
    DimensionMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        size: usize,
    },
    #[error("tuple has {got} matrices but the alphabet has {expected} variables")]
    TupleArity { got: usize, expected: usize },
}

/// The `2n`-letter alphabet `{X_1..X_n, X_1*..X_n*}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    n: u32,
}

impl Alphabet {
    pub fn new(n: usize) -> Result<Self, PolyError> {
        if n == 0 {
            return Err(PolyError::EmptyAlphabet);
        }
        Ok(Alphabet { n: n as u32 })
    }

    /// Number of base variables.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Number of letters, `2n`.
    pub fn size(&self) -> usize {
        2 * self.n as usize
    }

    pub fn contains(&self, letter: u32) -> bool {
        letter >= 1 && letter <= 2 * self.n
    }

    /// Toggles the star on a letter: `j <-> j + n`.
    pub fn star(&self, letter: u32) -> u32 {
        debug_assert!(self.contains(letter));
        if letter > self.n {
            letter - self.n
        } else {
            letter + self.n
        }
    }

    /// All words of exactly `degree` letters, in graded-lex order.
    pub fn words_of_degree(&self, degree: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..degree {
            let mut next = Vec::with_capacity(out.len() * self.size());
            for w in &out {
                for letter in 1..=2 * self.n {
                    let mut letters = w.0.clone();
                    letters.push(letter);
                    next.push(Word(letters));
                }
            }
            out = next;
        }
        out
    }

    /// All words of degree at most `degree`, in graded-lex order.
    pub fn words_up_to(&self, degree: usize) -> Vec<Word> {
        (0..=degree).flat_map(|k| self.words_of_degree(k)).collect()
    }
}

/// A monomial `X^α`: a finite sequence of letter indices. The empty word is `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    /// Builds a word after checking every letter against `alphabet`.
    pub fn checked(alphabet: Alphabet, letters: Vec<u32>) -> Result<Self, PolyError> {
        if let Some(&bad) = letters.iter().find(|&&l| !alphabet.contains(l)) {
            return Err(PolyError::LetterOutOfRange {
                letter: bad,
                max: alphabet.size() as u32,
            });
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + other.0.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `(X_{j1} ... X_{jk})* = X_{jk}* ... X_{j1}*`.
    pub fn adjoint(&self, alphabet: Alphabet) -> Word {
        Word(self.0.iter().rev().map(|&l| alphabet.star(l)).collect())
    }

    pub fn is_symmetric(&self, alphabet: Alphabet) -> bool {
        let k = self.0.len();
        (0..k).all(|i| self.0[i] == alphabet.star(self.0[k - 1 - i]))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded-lex comparison of two words.
pub fn graded_lex_compare(u: &Word, v: &Word) -> Ordering {
    u.cmp(v)
}

/// Coefficient ring for [`Poly`].
pub trait Coeff: Clone + fmt::Debug + Num + Neg<Output = Self> + ToPrimitive {}

impl<T> Coeff for T where T: Clone + fmt::Debug + Num + Neg<Output = T> + ToPrimitive {}

/// A polynomial with coefficients in `C`. Zero coefficients are never stored,
/// and terms iterate in graded-lex order of their words.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    alphabet: Alphabet,
    terms: BTreeMap<Word, C>,
}

/// Exact polynomial in `R<X, X*>`.
pub type NcPoly = Poly<Rational>;

/// Floating-point polynomial, used for numerically extracted squares.
pub type RealPoly = Poly<f64>;

impl<C: Coeff> Poly<C> {
    pub fn zero(alphabet: Alphabet) -> Self {
        Poly {
            alphabet,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(alphabet: Alphabet, c: C) -> Self {
        Self::monomial(alphabet, Word::empty(), c)
    }

    pub fn one(alphabet: Alphabet) -> Self {
        Self::constant(alphabet, C::one())
    }

    pub fn monomial(alphabet: Alphabet, word: Word, c: C) -> Self {
        let mut p = Self::zero(alphabet);
        p.add_term(word, c);
        p
    }

    /// The variable `X_j`, `1 <= j <= n`.
    pub fn var(alphabet: Alphabet, j: usize) -> Self {
        assert!(
            j >= 1 && j <= alphabet.n(),
            "variable index {j} out of range"
        );
        Self::monomial(alphabet, Word(vec![j as u32]), C::one())
    }

    /// The adjoint variable `X_j*`.
    pub fn var_star(alphabet: Alphabet, j: usize) -> Self {
        assert!(
            j >= 1 && j <= alphabet.n(),
            "variable index {j} out of range"
        );
        Self::monomial(alphabet, Word(vec![(j + alphabet.n()) as u32]), C::one())
    }

    pub fn from_terms<I>(alphabet: Alphabet, terms: I) -> Self
    where
        I: IntoIterator<Item = (Word, C)>,
    {
        let mut p = Self::zero(alphabet);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    /// Adds `c * word` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, word: Word, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert!(word.0.iter().all(|&l| self.alphabet.contains(l)));
        match self.terms.get_mut(&word) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(word, c);
            }
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Word, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, word: &Word) -> C {
        self.terms.get(word).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(Word::degree)
    }

    /// Graded-lex largest term.
    pub fn leading_term(&self) -> Option<(&Word, &C)> {
        self.terms.iter().next_back()
    }

    pub fn adjoint(&self) -> Self {
        let alphabet = self.alphabet;
        Poly {
            alphabet,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.adjoint(alphabet), c.clone()))
                .collect(),
        }
    }

    /// `p* = p`, decided coefficientwise.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(w, c)| {
            let adj = w.adjoint(self.alphabet);
            self.terms.get(&adj) == Some(c)
        })
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet);
        }
        Poly {
            alphabet: self.alphabet,
            terms: self
                .terms
                .iter()
                .map(|(w, v)| (w.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.alphabet);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `pq - qp`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Maps coefficients into another ring.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(
            self.alphabet,
            self.terms.iter().map(|(w, c)| (w.clone(), f(c))),
        )
    }

    /// Floating-point copy.
    pub fn to_real(&self) -> RealPoly {
        self.map_coeffs(|c| c.to_f64().unwrap_or(f64::NAN))
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().unwrap_or(f64::NAN).abs())
            .fold(0.0, f64::max)
    }

    fn assert_same_alphabet(&self, other: &Self) {
        assert_eq!(
            self.alphabet, other.alphabet,
            "polynomials over different alphabets"
        );
    }
}

impl RealPoly {
    /// Drops coefficients with magnitude at or below `tol`.
    pub fn prune(&self, tol: f64) -> RealPoly {
        Poly {
            alphabet: self.alphabet,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }
}

/// `true` iff `pq - qp = 0` exactly.
pub fn commutes(p: &NcPoly, q: &NcPoly) -> bool {
    p.commutator(q).is_zero()
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;

    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        self.assert_same_alphabet(rhs);
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;

    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        self.assert_same_alphabet(rhs);
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Poly<C> {
    type Output = Poly<C>;

    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        self.assert_same_alphabet(rhs);
        let mut out = Poly::zero(self.alphabet);
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a.clone() * b.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;

    fn neg(self) -> Poly<C> {
        Poly {
            alphabet: self.alphabet,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<C: Coeff> $tr for Poly<C> {
            type Output = Poly<C>;

            fn $method(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;

    fn neg(self) -> Poly<C> {
        -&self
    }
}

/// `n` real square matrices of one common size, substituted for `X_1..X_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<DMatrix<f64>>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self, PolyError> {
        let first = matrices.first().ok_or(PolyError::EmptyTuple)?;
        let size = first.nrows();
        if size == 0 {
            return Err(PolyError::DimensionMismatch {
                index: 0,
                rows: first.nrows(),
                cols: first.ncols(),
                size: 1,
            });
        }
        for (index, m) in matrices.iter().enumerate() {
            if m.nrows() != size || m.ncols() != size {
                return Err(PolyError::DimensionMismatch {
                    index,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    size,
                });
            }
        }
        Ok(MatrixTuple { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Common side length `k`.
    pub fn size(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }
}

/// Substitutes `M_j` for `X_j` and `M_j^T` for `X_j*`. The empty word
/// evaluates to the identity.
pub fn evaluate<C: Coeff>(p: &Poly<C>, tuple: &MatrixTuple) -> Result<DMatrix<f64>, PolyError> {
    let alphabet = p.alphabet();
    if tuple.len() != alphabet.n() {
        return Err(PolyError::TupleArity {
            got: tuple.len(),
            expected: alphabet.n(),
        });
    }
    let k = tuple.size();
    let n = alphabet.n();
    let letters: Vec<DMatrix<f64>> = tuple
        .matrices
        .iter()
        .cloned()
        .chain(tuple.matrices.iter().map(|m| m.transpose()))
        .collect();
    debug_assert_eq!(letters.len(), 2 * n);

    let mut out = DMatrix::zeros(k, k);
    for (w, c) in p.terms() {
        let mut prod = DMatrix::identity(k, k);
        for &l in w.letters() {
            prod = &prod * &letters[(l - 1) as usize];
        }
        out += prod * c.to_f64().unwrap_or(f64::NAN);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alph(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn w(letters: &[u32]) -> Word {
        Word::new(letters.to_vec())
    }

    #[test]
    fn word_adjoint_examples() {
        assert_eq!(w(&[1]).adjoint(alph(1)), w(&[2]));
        assert_eq!(Word::empty().adjoint(alph(1)), Word::empty());
        assert_eq!(w(&[1, 4]).adjoint(alph(2)), w(&[2, 3]));
    }

    #[test]
    fn graded_lex_examples() {
        let words = alph(1).words_up_to(2);
        let expected: Vec<Word> = [&[][..], &[1], &[2], &[1, 1], &[1, 2], &[2, 1], &[2, 2]]
            .iter()
            .map(|l| w(l))
            .collect();
        assert_eq!(words, expected);
        for pair in words.windows(2) {
            assert_eq!(graded_lex_compare(&pair[0], &pair[1]), Ordering::Less);
        }
        assert_eq!(
            graded_lex_compare(&w(&[1, 2]), &w(&[1, 2])),
            Ordering::Equal
        );
        // X_2 < X_1*
        assert_eq!(graded_lex_compare(&w(&[2]), &w(&[3])), Ordering::Less);
    }

    #[test]
    fn graded_lex_is_total_order_up_to_degree_three() {
        let words = alph(2).words_up_to(3);
        for a in &words {
            for b in &words {
                assert_eq!(a.cmp(b), b.cmp(a).reverse());
                assert_eq!(a.cmp(b) == Ordering::Equal, a == b);
                for c in &words {
                    if a < b && b < c {
                        assert!(a < c);
                    }
                }
            }
        }
    }

    #[test]
    fn mul_examples() {
        let a = alph(1);
        let x = NcPoly::var(a, 1);
        let xs = NcPoly::var_star(a, 1);
        assert_eq!(&x * &xs, NcPoly::monomial(a, w(&[1, 2]), q(1)));
        assert!((&x * &NcPoly::zero(a)).is_zero());

        let one = NcPoly::one(a);
        let lhs = &(&one + &x) * &(&one - &x);
        let expected = &one - &NcPoly::monomial(a, w(&[1, 1]), q(1));
        assert_eq!(lhs, expected);
    }

    #[test]
    fn adjoint_examples() {
        let a = alph(1);
        let xxs = NcPoly::monomial(a, w(&[1, 2]), q(1));
        assert_eq!(xxs.adjoint(), xxs);
        assert!(xxs.is_symmetric());
        let two_x = NcPoly::monomial(a, w(&[1]), q(2));
        assert_eq!(two_x.adjoint(), NcPoly::monomial(a, w(&[2]), q(2)));
        assert!(!two_x.is_symmetric());
    }

    #[test]
    fn degree_of_zero_is_sentinel() {
        let a = alph(2);
        assert_eq!(NcPoly::zero(a).degree(), None);
        assert_eq!(NcPoly::one(a).degree(), Some(0));
        assert_eq!(NcPoly::monomial(a, w(&[1, 3, 4]), q(-1)).degree(), Some(3));
    }

    #[test]
    fn cancellation_drops_terms() {
        let a = alph(1);
        let x = NcPoly::var(a, 1);
        assert!((&x - &x).is_zero());
        assert_eq!((&x - &x).num_terms(), 0);
    }

    #[test]
    fn evaluate_examples() {
        let a = alph(1);
        let xs_x = NcPoly::monomial(a, w(&[2, 1]), q(1));
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let tuple = MatrixTuple::new(vec![m]).unwrap();
        let got = evaluate(&xs_x, &tuple).unwrap();
        assert_eq!(got, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));

        let one = NcPoly::one(a);
        let t3 = MatrixTuple::new(vec![DMatrix::from_element(3, 3, 0.7)]).unwrap();
        assert_eq!(evaluate(&one, &t3).unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn evaluate_rejects_bad_tuples() {
        let err = MatrixTuple::new(vec![DMatrix::zeros(2, 2), DMatrix::zeros(3, 3)]).unwrap_err();
        assert!(matches!(err, PolyError::DimensionMismatch { index: 1, .. }));
        assert_eq!(MatrixTuple::new(vec![]).unwrap_err(), PolyError::EmptyTuple);
        assert!(MatrixTuple::new(vec![DMatrix::zeros(2, 3)]).is_err());

        let p = NcPoly::one(alph(2));
        let tuple = MatrixTuple::new(vec![DMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(
            evaluate(&p, &tuple).unwrap_err(),
            PolyError::TupleArity {
                got: 1,
                expected: 2
            }
        );
    }

    #[test]
    fn commutes_examples() {
        let a = alph(1);
        let x = NcPoly::var(a, 1);
        let xs = NcPoly::var_star(a, 1);
        assert!(!commutes(&x, &xs));

        let s = &(&xs * &x) + &(&x * &xs);
        assert!(commutes(&s, &s.pow(2)));

        // q = X: q*q = X*X against S. Hand expansion:
        //   (X*X)(X*X + XX*) = X*XX*X + X*XXX*
        //   (X*X + XX*)(X*X) = X*XX*X + XX*X*X
        // so the commutator is X*XXX* - XX*X*X.
        let qq = &xs * &x;
        let comm = qq.commutator(&s);
        let expected = NcPoly::from_terms(a, [(w(&[2, 1, 1, 2]), q(1)), (w(&[1, 2, 2, 1]), q(-1))]);
        assert_eq!(comm, expected);
        assert!(!commutes(&qq, &s));
    }

    #[test]
    fn letter_validation() {
        assert!(Word::checked(alph(1), vec![1, 2]).is_ok());
        assert_eq!(
            Word::checked(alph(1), vec![3]).unwrap_err(),
            PolyError::LetterOutOfRange { letter: 3, max: 2 }
        );
        assert_eq!(Alphabet::new(0).unwrap_err(), PolyError::EmptyAlphabet);
    }
}
