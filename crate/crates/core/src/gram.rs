//! Gram-matrix representations `V* M V = p`.
//!
//! `V` is the column of all words of degree at most `D`, graded-lex ordered.
//! The symmetric matrices `M` with `V* M V = p` form an affine space; this
//! module builds one exact representative of it plus an exact basis of the
//! directions `{A = A^T : V* A V = 0}`.
//!
//! Every upper-triangle cell `(i, j)` of `M` contributes to exactly one pair of
//! words `{w, w*}` with `w = V_i* V_j`, so the constraint system splits into
//! independent single-row blocks, one per such pair ("orbit"). The cells of a
//! degree-`2D` orbit all lie in the lower-right `(2n)^D x (2n)^D` block, and a
//! degree-`2D` word factors as `α* β` in exactly one way, so that block is the
//! same for every matrix in the space.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::RatMatrix;
use crate::ncpoly::{Alphabet, NcPoly, Rational, Word};
use crate::parse::format_word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GramError {
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("no Gram matrix reproduces the term of word {word:?}")]
    Infeasible { word: Vec<u32> },
    #[error("basis degree {requested} is below the minimum {minimum}")]
    DegreeTooSmall { requested: usize, minimum: usize },
    #[error("basis of {size} words exceeds the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
}

/// All words of degree `<= degree`, graded-lex ordered, with a reverse index.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    alphabet: Alphabet,
    degree: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl MonomialBasis {
    pub fn new(alphabet: Alphabet, degree: usize) -> Self {
        let words = alphabet.words_up_to(degree);
        let index = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        MonomialBasis {
            alphabet,
            degree,
            words,
            index,
        }
    }

    /// `sum_{k <= D} (2n)^k`, without building the basis.
    pub fn size_for(alphabet: Alphabet, degree: usize) -> usize {
        let base = alphabet.size();
        (0..=degree).map(|k| base.pow(k as u32)).sum()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &Word) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Number of degree-`D` words, `(2n)^D`.
    pub fn top_size(&self) -> usize {
        self.alphabet.size().pow(self.degree as u32)
    }

    /// Index of the first degree-`D` word.
    pub fn top_offset(&self) -> usize {
        self.len() - self.top_size()
    }
}

/// Sparse symmetric matrix stored by its upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    dim: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl SparseSym {
    pub fn new(dim: usize) -> Self {
        SparseSym {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sets `M_ij = M_ji = value`.
    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        let key = (i.min(j), i.max(j));
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries
            .get(&(i.min(j), i.max(j)))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero upper-triangle entries `((i, j), value)` with `i <= j`.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn to_dense(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.dim, self.dim);
        for (&(i, j), v) in &self.entries {
            m[(i, j)] = v.clone();
            m[(j, i)] = v.clone();
        }
        m
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(i, j), v) in &self.entries {
            let x = v.to_f64().unwrap_or(f64::NAN);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
        m
    }
}

/// One constraint row: the cells `(i, j)`, `i <= j`, whose word `V_i* V_j`
/// is `word` or `word*`, and the target coefficient.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub word: Word,
    pub symmetric: bool,
    pub cells: Vec<(usize, usize)>,
    pub rhs: Rational,
}

impl Orbit {
    /// Multiplicity of cell `(i, j)` in the coefficient of `word`.
    pub fn weight(&self, (i, j): (usize, usize)) -> u32 {
        if self.symmetric && i != j {
            2
        } else {
            1
        }
    }

    /// `sum_cells weight * X_ij`: the coefficient of `word` in `V* X V`.
    pub fn apply(&self, x: &DMatrix<f64>) -> f64 {
        self.cells
            .iter()
            .map(|&(i, j)| self.weight((i, j)) as f64 * x[(i, j)])
            .sum()
    }
}

/// The affine space of symmetric Gram matrices of a symmetric polynomial.
#[derive(Clone, Debug)]
pub struct GramSpace {
    target: NcPoly,
    basis: MonomialBasis,
    orbits: Vec<Orbit>,
    representative: SparseSym,
    kernel_basis: Vec<SparseSym>,
}

/// Lower/upper bounds on the rank of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankCertificate {
    #[serde(rename = "rank_lower")]
    pub lower: usize,
    /// `None` when no PSD Gram matrix was found.
    #[serde(rename = "rank_upper")]
    pub upper: Option<usize>,
    pub certified: bool,
}

impl RankCertificate {
    pub fn new(lower: usize, upper: Option<usize>) -> Self {
        if let Some(u) = upper {
            debug_assert!(lower <= u, "rank lower bound {lower} exceeds upper {u}");
        }
        RankCertificate {
            lower,
            upper,
            certified: upper == Some(lower),
        }
    }
}

/// Smallest basis degree able to represent `p`: `ceil(deg p / 2)`.
pub fn default_degree(p: &NcPoly) -> usize {
    p.degree().map_or(0, |d| d.div_ceil(2))
}

/// Builds the Gram space with the default basis degree.
pub fn build_gram_space(p: &NcPoly) -> Result<GramSpace, GramError> {
    build_gram_space_with_degree(p, None)
}

/// Builds the Gram space with basis degree `degree` (at least the default).
pub fn build_gram_space_with_degree(
    p: &NcPoly,
    degree: Option<usize>,
) -> Result<GramSpace, GramError> {
    build_gram_space_capped(p, degree, usize::MAX)
}

/// As [`build_gram_space_with_degree`], refusing bases longer than `cap`.
pub fn build_gram_space_capped(
    p: &NcPoly,
    degree: Option<usize>,
    cap: usize,
) -> Result<GramSpace, GramError> {
    if !p.is_symmetric() {
        return Err(GramError::NotSymmetric);
    }
    let alphabet = p.alphabet();
    let minimum = default_degree(p);
    let degree = degree.unwrap_or(minimum);
    if degree < minimum {
        return Err(GramError::DegreeTooSmall {
            requested: degree,
            minimum,
        });
    }
    let size = MonomialBasis::size_for(alphabet, degree);
    if size > cap {
        return Err(GramError::TooLarge { size, cap });
    }
    let basis = MonomialBasis::new(alphabet, degree);
    let orbits = collect_orbits(&basis, p)?;

    let dim = basis.len();
    let mut representative = SparseSym::new(dim);
    let mut kernel_basis = Vec::new();
    for orbit in &orbits {
        let row = RatMatrix::from_rows(vec![orbit
            .cells
            .iter()
            .map(|&c| Rational::from_integer(orbit.weight(c).into()))
            .collect()]);
        // Frobenius norm counts an off-diagonal cell twice.
        let frobenius: Vec<Rational> = orbit
            .cells
            .iter()
            .map(|&(i, j)| Rational::from_integer(if i == j { 1 } else { 2 }.into()))
            .collect();
        let solution = row
            .solve_min_norm(std::slice::from_ref(&orbit.rhs), &frobenius)
            .ok_or_else(|| GramError::Infeasible {
                word: orbit.word.letters().to_vec(),
            })?;
        for (&(i, j), v) in orbit.cells.iter().zip(solution) {
            representative.set(i, j, v);
        }
        for mut v in row.nullspace() {
            if v.iter()
                .find(|x| !x.is_zero())
                .is_some_and(Signed::is_negative)
            {
                v.iter_mut().for_each(|x| *x = -x.clone());
            }
            let mut a = SparseSym::new(dim);
            for (&(i, j), x) in orbit.cells.iter().zip(v) {
                a.set(i, j, x);
            }
            kernel_basis.push(a);
        }
    }

    Ok(GramSpace {
        target: p.clone(),
        basis,
        orbits,
        representative,
        kernel_basis,
    })
}

fn collect_orbits(basis: &MonomialBasis, p: &NcPoly) -> Result<Vec<Orbit>, GramError> {
    let alphabet = basis.alphabet();
    let words = basis.words();
    let adjoints: Vec<Word> = words.iter().map(|w| w.adjoint(alphabet)).collect();
    let mut groups: BTreeMap<Word, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, left) in adjoints.iter().enumerate() {
        for (j, right) in words.iter().enumerate().skip(i) {
            let w = left.concat(right);
            let w_adj = w.adjoint(alphabet);
            let key = if w_adj < w { w_adj } else { w };
            groups.entry(key).or_default().push((i, j));
        }
    }
    for (w, _) in p.terms() {
        let w_adj = w.adjoint(alphabet);
        let key = if w_adj < *w { &w_adj } else { w };
        if !groups.contains_key(key) {
            return Err(GramError::Infeasible {
                word: w.letters().to_vec(),
            });
        }
    }
    Ok(groups
        .into_iter()
        .map(|(word, cells)| {
            let symmetric = word.is_symmetric(alphabet);
            let rhs = p.coeff(&word);
            Orbit {
                word,
                symmetric,
                cells,
                rhs,
            }
        })
        .collect())
}

/// `V* M V` for a dense symmetric `M`, expanded term by term.
pub fn quadratic_form(basis: &MonomialBasis, m: &RatMatrix) -> NcPoly {
    let alphabet = basis.alphabet();
    let words = basis.words();
    let mut out = NcPoly::zero(alphabet);
    for (i, wi) in words.iter().enumerate() {
        let wi_adj = wi.adjoint(alphabet);
        for (j, wj) in words.iter().enumerate() {
            let c = &m[(i, j)];
            if !c.is_zero() {
                out.add_term(wi_adj.concat(wj), c.clone());
            }
        }
    }
    out
}

impl GramSpace {
    pub fn target(&self) -> &NcPoly {
        &self.target
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    /// Minimum-Frobenius-norm member of the space.
    pub fn representative(&self) -> &SparseSym {
        &self.representative
    }

    pub fn kernel_basis(&self) -> &[SparseSym] {
        &self.kernel_basis
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// `M0 + sum_k t_k A_k`, exactly.
    pub fn point(&self, t: &[Rational]) -> RatMatrix {
        assert_eq!(t.len(), self.kernel_basis.len());
        let mut m = self.representative.to_dense();
        for (a, tk) in self.kernel_basis.iter().zip(t) {
            if tk.is_zero() {
                continue;
            }
            for (&(i, j), v) in a.entries() {
                let d = v * tk;
                m[(i, j)] += &d;
                if i != j {
                    m[(j, i)] += d;
                }
            }
        }
        m
    }

    /// Largest coefficient deviation of `V* X V - p`, read orbit by orbit.
    pub fn residual(&self, x: &DMatrix<f64>) -> f64 {
        self.orbits
            .iter()
            .map(|o| (o.apply(x) - o.rhs.to_f64().unwrap_or(f64::NAN)).abs())
            .fold(
                0.0,
                |acc: f64, r| if r.is_nan() { f64::NAN } else { acc.max(r) },
            )
    }

    /// Frobenius-orthogonal projection of a symmetric `x` onto the space.
    pub fn project(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for o in &self.orbits {
            let r = o.rhs.to_f64().unwrap_or(f64::NAN) - o.apply(x);
            if r == 0.0 {
                continue;
            }
            // Coefficient row a_k over cells, Frobenius weights w_k.
            let denom: f64 = o
                .cells
                .iter()
                .map(|&(i, j)| {
                    let a = o.weight((i, j)) as f64;
                    let w = if i == j { 1.0 } else { 2.0 };
                    a * a / w
                })
                .sum();
            for &(i, j) in &o.cells {
                let a = o.weight((i, j)) as f64;
                let w = if i == j { 1.0 } else { 2.0 };
                let delta = r * a / w / denom;
                out[(i, j)] += delta;
                if i != j {
                    out[(j, i)] += delta;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> GramSpaceJson {
        let alphabet = self.basis.alphabet();
        let top = top_block(self);
        GramSpaceJson {
            n: alphabet.n(),
            degree: self.basis.degree(),
            basis: self
                .basis
                .words()
                .iter()
                .map(|w| w.letters().to_vec())
                .collect(),
            basis_text: self
                .basis
                .words()
                .iter()
                .map(|w| format_word(alphabet, w))
                .collect(),
            representative: matrix_strings(&self.representative.to_dense()),
            kernel_basis: self
                .kernel_basis
                .iter()
                .map(|a| matrix_strings(&a.to_dense()))
                .collect(),
            rank_lower: top.rank(),
            top_block: matrix_strings(&top),
        }
    }
}

/// The lower-right `(2n)^D x (2n)^D` block of the representative.
pub fn top_block(g: &GramSpace) -> RatMatrix {
    let offset = g.basis.top_offset();
    let size = g.basis.top_size();
    let mut m = RatMatrix::zeros(size, size);
    for (&(i, j), v) in g.representative.entries() {
        if i >= offset && j >= offset {
            m[(i - offset, j - offset)] = v.clone();
            m[(j - offset, i - offset)] = v.clone();
        }
    }
    m
}

/// Exact rank of [`top_block`], a lower bound on the rank of every member of
/// the space.
pub fn rank_lower_bound(g: &GramSpace) -> usize {
    top_block(g).rank()
}

/// JSON form of a [`GramSpace`]; rationals are written as `"a/b"` strings.
#[derive(Clone, Debug, Serialize)]
pub struct GramSpaceJson {
    pub n: usize,
    pub degree: usize,
    pub basis: Vec<Vec<u32>>,
    pub basis_text: Vec<String>,
    pub representative: Vec<Vec<String>>,
    pub kernel_basis: Vec<Vec<Vec<String>>>,
    pub top_block: Vec<Vec<String>>,
    pub rank_lower: usize,
}

fn matrix_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.to_string()).collect())
        .collect()
}
