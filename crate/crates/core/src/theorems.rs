//! The polynomial `S = sum_{|α|=d} X^{α*} X^α` and exact checks of the rank
//! lower bound `(2n)^d` for `q* S q`, `q* q S` and odd powers of `S`.
//!
//! All checks go through the exact top-block rank of the Gram space; no
//! floating point is involved.

use serde::Serialize;
use thiserror::Error;

use crate::gram::{build_gram_space_capped, rank_lower_bound, GramError};
use crate::ncpoly::{commutes, Alphabet, NcPoly, PolyError, Rational, Word};

pub const DEFAULT_TERM_CAP: usize = 4096;
pub const DEFAULT_BASIS_CAP: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoremError {
    #[error("S would have (2n)^d = {terms} terms, above the cap of {cap}")]
    TooManyTerms { terms: usize, cap: usize },
    #[error("d must be at least 1")]
    ZeroDegree,
    #[error("q must be nonzero")]
    ZeroQ,
    #[error("power k = {0} must be odd")]
    EvenPower(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Gram(#[from] GramError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundOptions {
    /// Cap on the number of terms of `S`.
    pub term_cap: usize,
    /// Cap on the Gram basis length.
    pub basis_cap: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            term_cap: DEFAULT_TERM_CAP,
            basis_cap: DEFAULT_BASIS_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SPolynomial {
    pub n: usize,
    pub d: usize,
    pub poly: NcPoly,
}

/// `(2n)^d`, or `None` on overflow.
pub fn theorem_bound(n: usize, d: usize) -> Option<usize> {
    (2 * n).checked_pow(u32::try_from(d).ok()?)
}

pub fn make_s(n: usize, d: usize) -> Result<SPolynomial, TheoremError> {
    make_s_capped(n, d, DEFAULT_TERM_CAP)
}

pub fn make_s_capped(n: usize, d: usize, cap: usize) -> Result<SPolynomial, TheoremError> {
    let alphabet = Alphabet::new(n)?;
    if d == 0 {
        return Err(TheoremError::ZeroDegree);
    }
    let terms = theorem_bound(n, d).unwrap_or(usize::MAX);
    if terms > cap {
        return Err(TheoremError::TooManyTerms { terms, cap });
    }
    let poly = NcPoly::from_terms(
        alphabet,
        alphabet.words_of_degree(d).into_iter().map(|a| {
            (
                a.adjoint(alphabet).concat(&a),
                Rational::from_integer(1.into()),
            )
        }),
    );
    Ok(SPolynomial { n, d, poly })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Qsq,
    Qqs,
    Power,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    /// `q` in the input grammar.
    pub q: String,
    /// Degree of the monomial basis the bound is relative to.
    pub basis_degree: usize,
    /// Exact top-block rank.
    pub lower: usize,
    /// `(2n)^d`.
    pub bound: usize,
    pub satisfied: bool,
}

/// Result of a `q* q S` check: the family only makes sense when `q*q`
/// commutes with `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QqsOutcome {
    Applicable(BoundReport),
    /// `[q*q, S] != 0`; carries its leading term.
    NotApplicable {
        n: usize,
        d: usize,
        q: String,
        witness_word: Vec<u32>,
        witness_coeff: String,
    },
}

fn check_bound(
    family: Family,
    p: &NcPoly,
    q: &NcPoly,
    d: usize,
    opts: &BoundOptions,
) -> Result<BoundReport, TheoremError> {
    let n = p.alphabet().n();
    let basis_degree = d + q.degree().unwrap_or(0);
    let g = build_gram_space_capped(p, Some(basis_degree), opts.basis_cap)?;
    let lower = rank_lower_bound(&g);
    let bound = theorem_bound(n, d).unwrap_or(usize::MAX);
    Ok(BoundReport {
        family,
        n,
        d,
        q: q.to_string(),
        basis_degree,
        lower,
        bound,
        satisfied: lower >= bound,
    })
}

fn s_for(q: &NcPoly, d: usize, opts: &BoundOptions) -> Result<NcPoly, TheoremError> {
    if q.is_zero() {
        return Err(TheoremError::ZeroQ);
    }
    Ok(make_s_capped(q.alphabet().n(), d, opts.term_cap)?.poly)
}

/// Rank of `q* S q` against `(2n)^d`, with basis degree `d + deg q`.
pub fn verify_qsq_bound(q: &NcPoly, d: usize) -> Result<BoundReport, TheoremError> {
    verify_qsq_bound_with(q, d, &BoundOptions::default())
}

pub fn verify_qsq_bound_with(
    q: &NcPoly,
    d: usize,
    opts: &BoundOptions,
) -> Result<BoundReport, TheoremError> {
    let s = s_for(q, d, opts)?;
    let p = &(&q.adjoint() * &s) * q;
    check_bound(Family::Qsq, &p, q, d, opts)
}

/// Rank of `q* q S` against `(2n)^d`, when `q* q S` is symmetric.
pub fn verify_qqs_bound(q: &NcPoly, d: usize) -> Result<QqsOutcome, TheoremError> {
    verify_qqs_bound_with(q, d, &BoundOptions::default())
}

pub fn verify_qqs_bound_with(
    q: &NcPoly,
    d: usize,
    opts: &BoundOptions,
) -> Result<QqsOutcome, TheoremError> {
    let s = s_for(q, d, opts)?;
    let qq = &q.adjoint() * q;
    if !commutes(&qq, &s) {
        let c = qq.commutator(&s);
        let (word, coeff) = c.leading_term().expect("nonzero commutator");
        return Ok(QqsOutcome::NotApplicable {
            n: q.alphabet().n(),
            d,
            q: q.to_string(),
            witness_word: word.letters().to_vec(),
            witness_coeff: coeff.to_string(),
        });
    }
    let p = &qq * &s;
    debug_assert!(p.is_symmetric());
    check_bound(Family::Qqs, &p, q, d, opts).map(QqsOutcome::Applicable)
}

/// Rank of `S^k` (odd `k`) as `q* S q` with `q = S^{(k-1)/2}`.
pub fn verify_power_bound(k: u32, n: usize, d: usize) -> Result<BoundReport, TheoremError> {
    verify_power_bound_with(k, n, d, &BoundOptions::default())
}

pub fn verify_power_bound_with(
    k: u32,
    n: usize,
    d: usize,
    opts: &BoundOptions,
) -> Result<BoundReport, TheoremError> {
    if k.is_multiple_of(2) {
        return Err(TheoremError::EvenPower(k));
    }
    let s = make_s_capped(n, d, opts.term_cap)?.poly;
    let q = s.pow((k - 1) / 2);
    let p = &(&q * &s) * &q;
    let mut report = check_bound(Family::Power, &p, &q, d, opts)?;
    report.q = format!("S^{}", (k - 1) / 2);
    Ok(report)
}

/// Leading words of `X^α q` over all degree-`d` words `α`, in the order of
/// [`Alphabet::words_of_degree`].
pub fn shifted_leading_words(q: &NcPoly, d: usize) -> Vec<Word> {
    let alphabet = q.alphabet();
    alphabet
        .words_of_degree(d)
        .into_iter()
        .filter_map(|a| {
            let shifted = &NcPoly::monomial(alphabet, a, Rational::from_integer(1.into())) * q;
            shifted.leading_term().map(|(w, _)| w.clone())
        })
        .collect()
}

/// Whether the `X^α q`, `|α| = d`, have pairwise distinct leading words (and
/// hence are linearly independent).
pub fn leading_words_distinct(q: &NcPoly, d: usize) -> bool {
    let mut words = shifted_leading_words(q, d);
    let total = words.len();
    words.sort();
    words.dedup();
    total == words.len() && total == q.alphabet().words_of_degree(d).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn p(text: &str, n: usize) -> NcPoly {
        parse(text, Some(n)).unwrap()
    }

    #[test]
    fn s_examples() {
        assert_eq!(make_s(1, 1).unwrap().poly, p("x1'*x1 + x1*x1'", 1));
        assert_eq!(
            make_s(2, 1).unwrap().poly,
            p("x1'*x1 + x2'*x2 + x1*x1' + x2*x2'", 2)
        );
        let s = make_s(1, 2).unwrap().poly;
        assert_eq!(
            s,
            p(
                "x1'*x1'*x1*x1 + x1'*x1*x1'*x1 + x1*x1'*x1*x1' + x1*x1*x1'*x1'",
                1
            )
        );
        assert!(s.is_symmetric());
        assert!(matches!(
            make_s_capped(2, 3, 10),
            Err(TheoremError::TooManyTerms { terms: 64, cap: 10 })
        ));
        assert_eq!(make_s(1, 0).unwrap_err(), TheoremError::ZeroDegree);
    }

    #[test]
    fn qsq_examples() {
        let r = verify_qsq_bound(&p("1", 1), 1).unwrap();
        assert_eq!((r.lower, r.bound, r.satisfied), (2, 2, true));
        let r = verify_qsq_bound(&p("x1", 1), 1).unwrap();
        assert!(r.satisfied && r.lower >= 2);
        assert_eq!(r.basis_degree, 2);
        let r = verify_qsq_bound(&p("1 + x1 + x1'", 1), 2).unwrap();
        assert_eq!(r.bound, 4);
        assert!(r.satisfied, "{r:?}");
        assert_eq!(
            verify_qsq_bound(&p("0", 1), 1).unwrap_err(),
            TheoremError::ZeroQ
        );
    }

    #[test]
    fn qqs_examples() {
        let s = make_s(1, 1).unwrap().poly;
        match verify_qqs_bound(&s, 1).unwrap() {
            QqsOutcome::Applicable(r) => assert!(r.satisfied && r.lower >= 2),
            other => panic!("{other:?}"),
        }
        match verify_qqs_bound(&p("x1", 1), 1).unwrap() {
            QqsOutcome::NotApplicable { witness_coeff, .. } => assert_ne!(witness_coeff, "0"),
            other => panic!("{other:?}"),
        }
        match verify_qqs_bound(&p("3/2", 1), 1).unwrap() {
            QqsOutcome::Applicable(r) => assert_eq!(r.lower, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_examples() {
        assert_eq!(verify_power_bound(1, 1, 1).unwrap().lower, 2);
        let r = verify_power_bound(3, 1, 1).unwrap();
        assert!(r.satisfied && r.lower >= 2);
        let r = verify_power_bound(3, 2, 1).unwrap();
        assert_eq!(r.bound, 4);
        assert!(r.satisfied && r.lower >= 4);
        assert_eq!(
            verify_power_bound(2, 1, 1).unwrap_err(),
            TheoremError::EvenPower(2)
        );
    }

    #[test]
    fn shifted_leading_words_are_concatenations() {
        let q = p("2 + x1*x2' - x2", 2);
        let lead = q.leading_term().unwrap().0.clone();
        let a = q.alphabet();
        let words = shifted_leading_words(&q, 2);
        for (alpha, w) in a.words_of_degree(2).iter().zip(&words) {
            assert_eq!(*w, alpha.concat(&lead));
        }
        assert!(leading_words_distinct(&q, 2));
    }
}
