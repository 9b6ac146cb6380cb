//! Dense primal-dual interior-point solver for small semidefinite programs
//!
//! ```text
//! min  <C, X>   s.t.  <A_i, X> = b_i,  X ⪰ 0
//! max  b^T y    s.t.  C - sum_i y_i A_i = Z ⪰ 0
//! ```
//!
//! Infeasible-start path following with Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector. The NT scaling matrix `G` (with `W = G G^T`,
//! `W Z W = X`) turns both `X` and `Z` into the same diagonal matrix `D`, so
//! the symmetrized complementarity equation is a diagonal Lyapunov solve.
//!
//! Primal infeasibility is reported when the dual iterate becomes an
//! approximate Farkas ray: `b^T y > 0` and `‖sum y_i A_i + Z‖ / b^T y` tiny.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{max_abs, min_eigenvalue, sym_eigen, symmetrize};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("objective must be a symmetric {0}x{0} matrix")]
    BadObjective(usize),
    #[error("constraint {index} references cell ({row}, {col}) outside dimension {dim}")]
    BadConstraint {
        index: usize,
        row: usize,
        col: usize,
        dim: usize,
    },
}

/// A symmetric constraint matrix given by its upper-triangle entries, with
/// its right-hand side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    /// `(i, j, a)` with `i <= j`, meaning `A_ij = A_ji = a`.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(entries: Vec<(usize, usize, f64)>, rhs: f64) -> Self {
        let entries = entries
            .into_iter()
            .map(|(i, j, a)| (i.min(j), i.max(j), a))
            .collect();
        Constraint { entries, rhs }
    }

    pub fn from_dense(a: &DMatrix<f64>, rhs: f64) -> Self {
        let n = a.nrows();
        let mut entries = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Constraint { entries, rhs }
    }

    pub fn to_dense(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        for &(i, j, a) in &self.entries {
            m[(i, j)] += a;
            if i != j {
                m[(j, i)] += a;
            }
        }
        m
    }

    /// `<A, X>` for symmetric `X`.
    pub fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, a)| {
                if i == j {
                    a * x[(i, i)]
                } else {
                    2.0 * a * x[(i, j)]
                }
            })
            .sum()
    }

    fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, a)| if i == j { a * a } else { 2.0 * a * a })
            .sum::<f64>()
            .sqrt()
    }

    fn scaled(&self, gamma: f64) -> Self {
        Constraint {
            entries: self
                .entries
                .iter()
                .map(|&(i, j, a)| (i, j, gamma * a))
                .collect(),
            rhs: gamma * self.rhs,
        }
    }

    fn add_to(&self, m: &mut DMatrix<f64>, scale: f64) {
        for &(i, j, a) in &self.entries {
            m[(i, j)] += scale * a;
            if i != j {
                m[(j, i)] += scale * a;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdpProblem {
    dim: usize,
    objective: DMatrix<f64>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(objective: DMatrix<f64>, constraints: Vec<Constraint>) -> Result<Self, SdpError> {
        let dim = objective.nrows();
        if objective.ncols() != dim || max_abs(&(&objective - objective.transpose())) > 0.0 {
            return Err(SdpError::BadObjective(dim));
        }
        for (index, c) in constraints.iter().enumerate() {
            if let Some(&(row, col, _)) = c.entries.iter().find(|&&(i, j, _)| i >= dim || j >= dim)
            {
                return Err(SdpError::BadConstraint {
                    index,
                    row,
                    col,
                    dim,
                });
            }
        }
        Ok(SdpProblem {
            dim,
            objective,
            constraints,
        })
    }

    /// Trace minimization: `C = I`.
    pub fn min_trace(dim: usize, constraints: Vec<Constraint>) -> Result<Self, SdpError> {
        Self::new(DMatrix::identity(dim, dim), constraints)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &DMatrix<f64> {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// The same problem with every `(A_i, b_i)` multiplied by `gamma`.
    pub fn scale_constraints(&self, gamma: f64) -> Self {
        SdpProblem {
            dim: self.dim,
            objective: self.objective.clone(),
            constraints: self.constraints.iter().map(|c| c.scaled(gamma)).collect(),
        }
    }

    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|c| c.inner(x)),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (c, &yi) in self.constraints.iter().zip(y.iter()) {
            if yi != 0.0 {
                c.add_to(&mut m, yi);
            }
        }
        m
    }

    /// `G_ij = <A_i, A_j>`.
    fn constraint_gram(&self) -> DMatrix<f64> {
        let m = self.constraints.len();
        let mut by_cell: std::collections::BTreeMap<(usize, usize), Vec<(usize, f64)>> =
            std::collections::BTreeMap::new();
        for (c, con) in self.constraints.iter().enumerate() {
            for &(i, j, a) in &con.entries {
                by_cell.entry((i, j)).or_default().push((c, a));
            }
        }
        let mut g = DMatrix::zeros(m, m);
        for (&(i, j), list) in &by_cell {
            let w = if i == j { 1.0 } else { 2.0 };
            for &(p, a) in list {
                for &(q, b) in list {
                    g[(p, q)] += w * a * b;
                }
            }
        }
        g
    }

    fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|c| c.rhs),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on `max_i |<A_i, X> - b_i|` for an optimal point.
    pub feas_tol: f64,
    /// Bound on `-λ_min(X)` for an optimal point.
    pub psd_tol: f64,
    pub max_iter: usize,
    /// Relative duality gap `<X, Z> / (1 + |pobj| + |dobj|)`.
    pub gap_tol: f64,
    /// Farkas-ray threshold for declaring primal infeasibility.
    pub infeas_tol: f64,
    /// Multiplies the default initial point `X0 = αI`, `Z0 = βI`.
    pub start_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-9,
            psd_tol: 1e-9,
            max_iter: 200,
            gap_tol: 1e-13,
            infeas_tol: 1e-8,
            start_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// `max_i |<A_i, X> - b_i|`.
    pub primal_residual: f64,
    /// `λ_min(X)`.
    pub eigenvalue_floor: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

/// Nesterov-Todd scaling at a strictly feasible-cone pair `(X, Z)`.
struct NtScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
}

impl NtScaling {
    fn new(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Self> {
        let l = x.clone().cholesky()?.l();
        let r = z.clone().cholesky()?.l();
        let svd = (r.transpose() * &l).svd(false, true);
        let v = svd.v_t?.transpose();
        let d = svd.singular_values;
        if d.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return None;
        }
        let mut g = l * v;
        for (j, mut col) in g.column_iter_mut().enumerate() {
            col /= d[j].sqrt();
        }
        let w = &g * g.transpose();
        let g_inv = g.clone().try_inverse()?;
        Some(NtScaling { g, g_inv, w, d })
    }

    fn to_scaled(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = self.g.transpose() * m * &self.g;
        symmetrize(&mut s);
        s
    }

    /// Primal scaling `G^{-1} M G^{-T}` (maps `X` to `D`).
    fn x_to_scaled(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = &self.g_inv * m * self.g_inv.transpose();
        symmetrize(&mut s);
        s
    }

    fn unscale(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut s = &self.g * m * self.g.transpose();
        symmetrize(&mut s);
        s
    }

    /// Solves `D∘H = R` (Jordan product) for `H`.
    fn lyapunov(&self, rc: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(rc.nrows(), rc.ncols(), |i, j| {
            2.0 * rc[(i, j)] / (self.d[i] + self.d[j])
        })
    }

    /// Largest step keeping `D + αΔ ⪰ 0` in the scaled space.
    fn max_step(&self, delta: &DMatrix<f64>) -> f64 {
        let n = self.d.len();
        let k = DMatrix::from_fn(n, n, |i, j| delta[(i, j)] / (self.d[i] * self.d[j]).sqrt());
        let lam = min_eigenvalue(&k);
        if lam >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / lam
        }
    }
}

/// Schur complement `M_ij = tr(A_i W A_j W)`.
fn schur(prob: &SdpProblem, w: &DMatrix<f64>) -> DMatrix<f64> {
    let m = prob.constraints.len();
    let n = prob.dim;
    let mut out = DMatrix::zeros(m, m);
    let mut p = DMatrix::zeros(n, n);
    for (i, ci) in prob.constraints.iter().enumerate() {
        p.fill(0.0);
        for &(k, l, a) in &ci.entries {
            let wk = w.column(k);
            let wl = w.column(l);
            if k == l {
                p.ger(a, &wk, &wk, 1.0);
            } else {
                p.ger(a, &wk, &wl, 1.0);
                p.ger(a, &wl, &wk, 1.0);
            }
        }
        for j in i..m {
            let v = prob.constraints[j].inner(&p);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Self {
        match m.clone().cholesky() {
            Some(c) => SchurFactor::Cholesky(c),
            None => {
                let bump = 1e-13 * m.diagonal().iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
                let reg = &m + DMatrix::identity(m.nrows(), m.ncols()) * bump;
                match reg.clone().cholesky() {
                    Some(c) => SchurFactor::Cholesky(c),
                    None => SchurFactor::Lu(reg.lu()),
                }
            }
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            SchurFactor::Cholesky(c) => Some(c.solve(rhs)),
            SchurFactor::Lu(lu) => lu.solve(rhs),
        }
    }
}

/// QR factorisation of the scaled constraint matrix, columns
/// `svec(G^T A_i G)`. Solving through it avoids forming the Schur complement,
/// whose condition number is the square of this one.
struct ScaledQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            out[k] = if i == j {
                m[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * m[(i, j)]
            };
            k += 1;
        }
    }
    out
}

fn smat(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                out[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                out[(i, j)] = x;
                out[(j, i)] = x;
            }
            k += 1;
        }
    }
    out
}

impl ScaledQr {
    fn new(prob: &SdpProblem, nt: &NtScaling) -> Option<Self> {
        let n = prob.dim;
        let k = prob.constraints.len();
        if k == 0 || k > n * (n + 1) / 2 {
            return None;
        }
        let gt = nt.g.transpose();
        let mut cols = DMatrix::zeros(n * (n + 1) / 2, k);
        let mut a = DMatrix::zeros(n, n);
        for (i, ci) in prob.constraints.iter().enumerate() {
            a.fill(0.0);
            for &(p, q, v) in &ci.entries {
                let (gp, gq) = (gt.column(p), gt.column(q));
                if p == q {
                    a.ger(v, &gp, &gp, 1.0);
                } else {
                    a.ger(v, &gp, &gq, 1.0);
                    a.ger(v, &gq, &gp, 1.0);
                }
            }
            cols.set_column(i, &svec(&a));
        }
        let qr = cols.qr();
        let r = qr.r();
        let big = r.diagonal().amax();
        if big.is_nan() || big <= 0.0 || r.diagonal().iter().any(|d| d.abs() <= 1e-13 * big) {
            return None;
        }
        Some(ScaledQr { q: qr.q(), r })
    }
}

enum Factor {
    Qr(ScaledQr),
    Schur(SchurFactor),
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dx_s: DMatrix<f64>,
    dz_s: DMatrix<f64>,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    prob: &SdpProblem,
    nt: &NtScaling,
    factor: &Factor,
    aat: &SchurFactor,
    rp: &DVector<f64>,
    rd: &DMatrix<f64>,
    rd_s: &DMatrix<f64>,
    rc: &DMatrix<f64>,
) -> Option<Direction> {
    let h = nt.lyapunov(rc);
    let v = &h - rd_s;
    let (dy, mut dx_s) = match factor {
        Factor::Qr(qr) => {
            // R dy = R^{-T} rp - Q^T v,  svec(dx_s) = v + Q (R dy).
            let sv = svec(&v);
            let mut t = qr.r.tr_solve_upper_triangular(rp)?;
            t -= qr.q.tr_mul(&sv);
            let dy = qr.r.solve_upper_triangular(&t)?;
            (dy, smat(&(sv + &qr.q * t), v.nrows()))
        }
        Factor::Schur(f) => {
            let rhs = rp - prob.apply(&nt.unscale(&v));
            let dy = f.solve(&rhs)?;
            let mut dz = rd - prob.adjoint(&dy);
            symmetrize(&mut dz);
            (dy, &h - nt.to_scaled(&dz))
        }
    };
    let mut dz = rd - prob.adjoint(&dy);
    symmetrize(&mut dz);
    let dz_s = nt.to_scaled(&dz);
    let mut dx = nt.unscale(&dx_s);
    // Near the boundary the Schur system is ill-conditioned and `A dx = rp`
    // drifts; restore it by a least-squares correction.
    if let Some(u) = aat.solve(&(rp - prob.apply(&dx))) {
        let fix = prob.adjoint(&u);
        dx_s += nt.x_to_scaled(&fix);
        dx += fix;
        symmetrize(&mut dx);
    }
    if dx
        .iter()
        .chain(dy.iter())
        .chain(dz.iter())
        .any(|v| !v.is_finite())
    {
        return None;
    }
    Some(Direction {
        dx,
        dy,
        dz,
        dx_s,
        dz_s,
    })
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Solves the SDP. Deterministic: fixed start point, no randomization.
pub fn solve(prob: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let n = prob.dim;
    let b = prob.rhs();
    let c = &prob.objective;
    let c_norm = max_abs(c);
    let nf = n.max(1) as f64;

    let a_norms: Vec<f64> = prob.constraints.iter().map(Constraint::frobenius).collect();
    let alpha = prob
        .constraints
        .iter()
        .zip(&a_norms)
        .map(|(ci, &an)| nf * (1.0 + ci.rhs.abs()) / (1.0 + an))
        .fold(10.0_f64.max(nf.sqrt()), f64::max);
    let beta = a_norms
        .iter()
        .copied()
        .fold(c.norm(), f64::max)
        .mul_add(1.0 / nf.sqrt(), 1.0 / nf.sqrt())
        .max(10.0_f64.max(nf.sqrt()));

    let mut x = DMatrix::identity(n, n) * (alpha * opts.start_scale);
    let mut z = DMatrix::identity(n, n) * (beta * opts.start_scale);
    let mut y = DVector::zeros(prob.constraints.len());

    let aat = SchurFactor::new(prob.constraint_gram());
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < opts.max_iter {
        let rp = &b - prob.apply(&x);
        let aty = prob.adjoint(&y);
        let mut rd = c - &z - &aty;
        symmetrize(&mut rd);
        let pobj = inner(c, &x);
        let dobj = b.dot(&y);
        let pres = rp.amax();
        let dres = max_abs(&rd);
        let gap = inner(&x, &z);
        let rel_gap = gap / (1.0 + pobj.abs() + dobj.abs());

        if pres <= opts.feas_tol
            && dres <= opts.feas_tol * (1.0 + c_norm)
            && rel_gap <= opts.gap_tol
        {
            status = SdpStatus::Optimal;
            break;
        }
        if dobj > 0.0 && max_abs(&(&aty + &z)) / dobj < opts.infeas_tol {
            status = SdpStatus::Infeasible;
            break;
        }
        if stalls >= 3 {
            if pres <= opts.feas_tol && dres <= 1e-6 * (1.0 + c_norm) && rel_gap <= 1e-6 {
                status = SdpStatus::Optimal;
            } else if dobj > 0.0 && max_abs(&(&aty + &z)) / dobj < 1e-5 {
                status = SdpStatus::Infeasible;
            }
            break;
        }
        iterations += 1;

        let Some(nt) = NtScaling::new(&x, &z) else {
            stalls = 3;
            continue;
        };
        let factor = match ScaledQr::new(prob, &nt) {
            Some(qr) => Factor::Qr(qr),
            None => Factor::Schur(SchurFactor::new(schur(prob, &nt.w))),
        };
        let rd_s = nt.to_scaled(&rd);
        let mu = gap / nf;

        // Predictor.
        let d2 = DMatrix::from_diagonal(&nt.d.map(|d| -d * d));
        let Some(aff) = direction(prob, &nt, &factor, &aat, &rp, &rd, &rd_s, &d2) else {
            stalls = 3;
            continue;
        };
        let ap = nt.max_step(&aff.dx_s).min(1.0);
        let ad = nt.max_step(&aff.dz_s).min(1.0);
        let dmat = DMatrix::from_diagonal(&nt.d);
        let mu_aff = inner(&(&dmat + &aff.dx_s * ap), &(&dmat + &aff.dz_s * ad)) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let cross = (&aff.dx_s * &aff.dz_s + &aff.dz_s * &aff.dx_s) * 0.5;
        let rc = DMatrix::identity(n, n) * (sigma * mu) + &d2 - cross;
        let Some(step) = direction(prob, &nt, &factor, &aat, &rp, &rd, &rd_s, &rc) else {
            stalls = 3;
            continue;
        };
        let tau = 0.98;
        let ap = (tau * nt.max_step(&step.dx_s)).min(1.0);
        let ad = (tau * nt.max_step(&step.dz_s)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
        } else {
            stalls = 0;
        }

        x += &step.dx * ap;
        y += &step.dy * ad;
        z += &step.dz * ad;
        symmetrize(&mut x);
        symmetrize(&mut z);
    }

    let primal_residual = (&b - prob.apply(&x)).amax();
    let eigenvalue_floor = if n == 0 { 0.0 } else { min_eigenvalue(&x) };
    if status == SdpStatus::Optimal
        && (primal_residual > opts.feas_tol || eigenvalue_floor < -opts.psd_tol)
    {
        status = SdpStatus::MaxIterations;
    }
    SdpSolution {
        objective: inner(c, &x),
        dual_objective: b.dot(&y),
        primal_residual,
        eigenvalue_floor,
        x,
        y,
        z,
        status,
        iterations,
    }
}

/// `sup { t >= 0 : X + tN ⪰ 0 }` for PSD `X`, or `+∞`.
///
/// Eigenvalues of `X` at or below `1e-9 * λ_max(X)` count as its null space.
pub fn max_step_to_boundary(x: &DMatrix<f64>, dir: &DMatrix<f64>) -> f64 {
    max_step_to_boundary_with_tol(x, dir, 1e-9)
}

/// [`max_step_to_boundary`] with an explicit relative null-space threshold.
pub fn max_step_to_boundary_with_tol(x: &DMatrix<f64>, dir: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let n = x.nrows();
    let (values, vectors) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let scale = max_abs(dir).max(f64::MIN_POSITIVE);
    if top <= 0.0 {
        return if min_eigenvalue(dir) >= -1e-12 * scale {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let range: Vec<usize> = (0..n).filter(|&k| values[k] > rel_tol * top).collect();
    let null: Vec<usize> = (0..n).filter(|&k| values[k] <= rel_tol * top).collect();
    let u_r = vectors.select_columns(&range);
    let u_0 = vectors.select_columns(&null);

    let range_step = {
        let nr = u_r.transpose() * dir * &u_r;
        let k = DMatrix::from_fn(range.len(), range.len(), |i, j| {
            nr[(i, j)] / (values[range[i]] * values[range[j]]).sqrt()
        });
        let lam = min_eigenvalue(&k);
        if lam >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / lam
        }
    };
    if null.is_empty() || max_abs(&(dir * &u_0)) <= 1e-12 * scale {
        return range_step;
    }

    // The direction leaves the face of X: either it is immediately infeasible
    // or the boundary is found by bisection on λ_min.
    let n00 = u_0.transpose() * dir * &u_0;
    let (n00_values, n00_vectors) = sym_eigen(&n00);
    if n00_values[0] < -1e-12 * scale {
        return 0.0;
    }
    // A null direction of X that N leaves at zero curvature but couples to
    // the range makes X + tN indefinite for every t > 0.
    for k in 0..n00_values.len() {
        if n00_values[k] <= 1e-12 * scale {
            let v = &u_0 * n00_vectors.column(k);
            if (dir * v).amax() > 1e-12 * scale {
                return 0.0;
            }
        }
    }
    let feasible = |t: f64| min_eigenvalue(&(x + dir * t)) >= -1e-12 * top;
    let mut hi = if range_step.is_finite() {
        range_step
    } else {
        1.0
    };
    while feasible(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
