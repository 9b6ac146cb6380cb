//! Dense linear algebra: exact rational elimination for ranks, kernels and
//! minimum-norm solutions, plus a few symmetric eigenvalue helpers on `f64`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ncpoly::Rational;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Bit size used to prefer small pivots during exact elimination.
fn height(x: &Rational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)].clone())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Exact rank by Gaussian elimination with full pivoting.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut live_rows: Vec<usize> = (0..m.rows)
            .filter(|&i| m.row(i).iter().any(|x| !x.is_zero()))
            .collect();
        let mut live_cols: Vec<usize> = (0..m.cols)
            .filter(|&j| (0..m.rows).any(|i| !m[(i, j)].is_zero()))
            .collect();
        let mut rank = 0;
        loop {
            let mut best: Option<(usize, usize, u64)> = None;
            for (ri, &i) in live_rows.iter().enumerate() {
                for (ci, &j) in live_cols.iter().enumerate() {
                    let x = &m[(i, j)];
                    if !x.is_zero() {
                        let h = height(x);
                        if best.is_none_or(|(_, _, bh)| h < bh) {
                            best = Some((ri, ci, h));
                        }
                    }
                }
            }
            let Some((ri, ci, _)) = best else { break };
            let pi = live_rows.swap_remove(ri);
            let pj = live_cols.swap_remove(ci);
            rank += 1;
            let pivot = m[(pi, pj)].clone();
            for &i in &live_rows {
                if m[(i, pj)].is_zero() {
                    continue;
                }
                let factor = &m[(i, pj)] / &pivot;
                for &j in &live_cols {
                    if !m[(pi, j)].is_zero() {
                        let delta = &factor * &m[(pi, j)];
                        m[(i, j)] -= delta;
                    }
                }
                m[(i, pj)] = Rational::zero();
            }
            live_rows.retain(|&i| live_cols.iter().any(|&j| !m[(i, j)].is_zero()));
        }
        rank
    }

    /// Reduced row echelon form; returns the reduced matrix and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows)
                .filter(|&i| !m[(i, c)].is_zero())
                .min_by_key(|&i| height(&m[(i, c)]))
            else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                if !m[(r, j)].is_zero() {
                    m[(r, j)] *= &inv;
                }
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.cols {
                    if !m[(r, j)].is_zero() {
                        let delta = &factor * &m[(r, j)];
                        m[(i, j)] -= delta;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Exact basis of `{x : A x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Solves `A x = b` minimizing `sum_k w_k x_k^2` (all `w_k > 0`), exactly.
    ///
    /// Uses the weighted normal equations `x = W^-1 A^T (A W^-1 A^T)^-1 b` on a
    /// row-independent subset of `A`. Returns `None` when the system is
    /// inconsistent.
    pub fn solve_min_norm(&self, b: &[Rational], weights: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        assert_eq!(weights.len(), self.cols);

        // Consistency and independent rows from the augmented echelon form.
        let augmented = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (_, aug_pivots) = augmented.rref();
        if aug_pivots.last() == Some(&self.cols) {
            return None;
        }
        let independent = independent_rows(self);
        let a = Self::from_fn(independent.len(), self.cols, |i, j| {
            self[(independent[i], j)].clone()
        });
        let rhs: Vec<Rational> = independent.iter().map(|&i| b[i].clone()).collect();

        let inv_w: Vec<Rational> = weights.iter().map(|w| w.recip()).collect();
        let k = a.rows;
        let gram = Self::from_fn(k, k, |i, j| {
            (0..a.cols)
                .filter(|&c| !a[(i, c)].is_zero() && !a[(j, c)].is_zero())
                .map(|c| &a[(i, c)] * &inv_w[c] * &a[(j, c)])
                .fold(Rational::zero(), |acc, x| acc + x)
        });
        let lambda = gram.solve_square(&rhs)?;
        Some(
            (0..a.cols)
                .map(|c| {
                    let s = (0..k)
                        .filter(|&i| !a[(i, c)].is_zero())
                        .map(|i| &a[(i, c)] * &lambda[i])
                        .fold(Rational::zero(), |acc, x| acc + x);
                    s * &inv_w[c]
                })
                .collect(),
        )
    }

    /// Solves a nonsingular square system exactly.
    pub fn solve_square(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let augmented = Self::from_fn(n, n + 1, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = augmented.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some((0..n).map(|i| r[(i, n)].clone()).collect())
    }
}

/// Indices of a maximal set of linearly independent rows, in original order.
fn independent_rows(a: &RatMatrix) -> Vec<usize> {
    let (_, pivots) = a.transpose().rref();
    pivots
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Symmetrizes in place: `(M + M^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let mut sym = m.clone();
    symmetrize(&mut sym);
    // Work on the unit-scaled matrix with negligible entries flushed: entries
    // deep in the subnormal range make the QR sweep produce NaN.
    let scale = sym.amax();
    if scale > 0.0 && scale.is_finite() {
        let floor = f64::EPSILON * f64::EPSILON;
        sym.apply(|v| {
            *v = if v.abs() < floor * scale {
                0.0
            } else {
                *v / scale
            }
        });
    } else if scale == 0.0 {
        return (DVector::zeros(n), DMatrix::identity(n, n));
    }
    let unscale = if scale.is_finite() { scale } else { 1.0 };
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k] * unscale));
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let (values, _) = sym_eigen(m);
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Number of eigenvalues above `rel_tol * max(|λ|)`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let (values, _) = sym_eigen(m);
    let top = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > rel_tol * top).count()
}
