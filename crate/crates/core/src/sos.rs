//! Sum-of-squares decompositions `p = sum_i f_i* f_i`.
//!
//! A PSD Gram matrix `X = L^T L` of `p` yields one square per row of `L`, so
//! the number of squares is `rank X`. The search runs in three stages:
//!
//! 1. minimize `tr X` over the PSD part of the Gram space (an SDP);
//! 2. walk along Gram-space kernel directions to the PSD boundary while that
//!    strictly lowers the rank;
//! 3. for kernels of dimension at most 3, if the rank still exceeds the exact
//!    lower bound from the top-degree block, a coordinate grid search with
//!    step halving, followed by another boundary walk.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::gram::{build_gram_space, rank_lower_bound, GramError, GramSpace, RankCertificate};
use crate::linalg::{max_abs, sym_eigen};
use crate::ncpoly::{evaluate, NcPoly, RealPoly};
use crate::random::{random_tuple, rng};
use crate::sdp::{
    max_step_to_boundary_with_tol, solve, Constraint, SdpProblem, SdpSolution, SdpStatus,
    SolverOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SosError {
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error(transparent)]
    Gram(GramError),
    /// The SDP over the Gram space has no PSD point: `p` is not a sum of squares.
    #[error("no PSD Gram matrix exists; the polynomial is not a sum of squares")]
    Infeasible { rank_lower: usize },
    #[error("SDP solver stopped with status {status:?} (residual {residual:e})")]
    SolverFailed { status: SdpStatus, residual: f64 },
    #[error("extracted {squares} squares but the exact lower bound is {rank_lower}")]
    RankBelowBound { squares: usize, rank_lower: usize },
}

impl From<GramError> for SosError {
    fn from(e: GramError) -> Self {
        match e {
            GramError::NotSymmetric => SosError::NotSymmetric,
            other => SosError::Gram(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SosOptions {
    pub solver: SolverOptions,
    /// Eigenvalues at or below `rank_tol * λ_max` count as zero.
    pub rank_tol: f64,
    /// Grid refinement runs only for kernels up to this dimension.
    pub refine_max_kernel: usize,
    pub refine_rounds: usize,
    /// A solver run that stalls short of its tolerances is still used if its
    /// primal residual is below this; the result is polished and judged by
    /// its reconstruction error.
    pub accept_residual: f64,
    /// Rounds of reweighted trace minimization (`min tr((X_k + δI)^{-1} X)`)
    /// tried when the rank is still above the certified lower bound.
    pub reweight_rounds: usize,
    /// Initial `δ` relative to `λ_max(X_k)`; divided by 10 each round.
    pub reweight_delta: f64,
    /// Restarts from random PSD objectives, each followed by reweighting.
    pub random_restarts: usize,
    /// Gram-space residual (relative to `max(1, max |coeff p|)`) a
    /// candidate must reach to compete on rank.
    pub max_residual: f64,
}

impl Default for SosOptions {
    fn default() -> Self {
        SosOptions {
            solver: SolverOptions::default(),
            rank_tol: 1e-7,
            refine_max_kernel: 3,
            refine_rounds: 20,
            accept_residual: 1e-6,
            reweight_rounds: 6,
            random_restarts: 6,
            reweight_delta: 1e-2,
            max_residual: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SosDecomposition {
    /// Sorted by graded-lex leading word, each with nonnegative leading
    /// coefficient. Unique only up to an orthogonal mixing of the rows.
    pub squares: Vec<RealPoly>,
    /// The PSD Gram matrix the squares were read from.
    pub gram: DMatrix<f64>,
    pub certificate: RankCertificate,
    /// `max |coeff(sum f_i* f_i - p)|`.
    pub reconstruction_error: f64,
}

/// Basis rows that vanish in every PSD Gram matrix, found exactly: the
/// diagonal cells of a zero-target orbit whose other live cells are all
/// diagonal must be zero (PSD diagonals are nonnegative), and a zero
/// diagonal kills its row. Iterated to a fixed point.
pub fn forced_zero_rows(g: &GramSpace) -> Vec<bool> {
    let mut zero = vec![false; g.dim()];
    loop {
        let mut changed = false;
        for o in g.orbits().iter().filter(|o| o.rhs.is_zero()) {
            let live: Vec<(usize, usize)> = o
                .cells
                .iter()
                .copied()
                .filter(|&(i, j)| !zero[i] && !zero[j])
                .collect();
            if !live.is_empty() && live.iter().all(|&(i, j)| i == j) {
                for (i, _) in live {
                    zero[i] = true;
                }
                changed = true;
            }
        }
        if !changed {
            return zero;
        }
    }
}

/// The trace-minimization SDP on the rows not forced to zero.
#[derive(Clone, Debug)]
pub struct ReducedSdp {
    pub problem: SdpProblem,
    /// Basis index of each SDP row.
    pub keep: Vec<usize>,
    /// Size of the full basis.
    pub full_dim: usize,
}

impl ReducedSdp {
    /// Embeds a reduced matrix back into the full basis.
    pub fn embed(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut full = DMatrix::zeros(self.full_dim, self.full_dim);
        for (a, &i) in self.keep.iter().enumerate() {
            for (b, &j) in self.keep.iter().enumerate() {
                full[(i, j)] = x[(a, b)];
            }
        }
        full
    }
}

/// Trace-minimization SDP over the Gram space: one equality per orbit,
/// restricted to [`forced_zero_rows`]' complement. `None` when some orbit
/// with nonzero target has no live cell left, which rules out any PSD point.
pub fn sdp_problem(g: &GramSpace) -> Option<ReducedSdp> {
    let zero = forced_zero_rows(g);
    let keep: Vec<usize> = (0..g.dim()).filter(|&i| !zero[i]).collect();
    let mut index = vec![usize::MAX; g.dim()];
    for (a, &i) in keep.iter().enumerate() {
        index[i] = a;
    }
    let mut constraints = Vec::new();
    for o in g.orbits() {
        let entries: Vec<(usize, usize, f64)> = o
            .cells
            .iter()
            .filter(|&&(i, j)| !zero[i] && !zero[j])
            .map(|&(i, j)| {
                let w = o.weight((i, j)) as f64;
                let (a, b) = (index[i].min(index[j]), index[i].max(index[j]));
                (a, b, if i == j { w } else { w / 2.0 })
            })
            .collect();
        if entries.is_empty() {
            if o.rhs.is_zero() {
                continue;
            }
            return None;
        }
        constraints.push(Constraint::new(entries, o.rhs.to_f64().unwrap_or(f64::NAN)));
    }
    let problem =
        SdpProblem::min_trace(keep.len(), constraints).expect("Gram constraints fit the basis");
    Some(ReducedSdp {
        problem,
        keep,
        full_dim: g.dim(),
    })
}

pub fn sos_decompose(p: &NcPoly) -> Result<SosDecomposition, SosError> {
    sos_decompose_with(p, &SosOptions::default())
}

pub fn sos_decompose_with(p: &NcPoly, opts: &SosOptions) -> Result<SosDecomposition, SosError> {
    let g = build_gram_space(p)?;
    let (decomposition, _) = decompose_in(&g, opts)?;
    Ok(decomposition)
}

/// Decomposes within a prebuilt Gram space; also returns the raw SDP result.
pub fn decompose_in(
    g: &GramSpace,
    opts: &SosOptions,
) -> Result<(SosDecomposition, Option<SdpSolution>), SosError> {
    let lower = rank_lower_bound(g);
    if g.target().is_zero() {
        let decomposition = SosDecomposition {
            squares: Vec::new(),
            gram: DMatrix::zeros(g.dim(), g.dim()),
            certificate: RankCertificate::new(0, Some(0)),
            reconstruction_error: 0.0,
        };
        return Ok((decomposition, None));
    }

    let Some(reduced) = sdp_problem(g) else {
        return Err(SosError::Infeasible { rank_lower: lower });
    };
    let sol = solve(&reduced.problem, &opts.solver);
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => return Err(SosError::Infeasible { rank_lower: lower }),
        SdpStatus::MaxIterations if sol.primal_residual <= opts.accept_residual => {}
        status => {
            return Err(SosError::SolverFailed {
                status,
                residual: sol.primal_residual,
            })
        }
    }

    let tol = opts.max_residual * g.target().max_abs_coeff().max(1.0);
    let candidate = |x: DMatrix<f64>| {
        let x = refine_factor(g, &x, opts.rank_tol);
        Candidate {
            rank: rank(&x, opts.rank_tol),
            residual: g.residual(&x),
            x,
        }
    };

    let mut x = polish(g, &reduced.embed(&sol.x), opts.rank_tol);
    x = reduce_rank_on_boundary(&x, g, opts.rank_tol);
    if rank(&x, opts.rank_tol) > lower && g.kernel_dim() <= opts.refine_max_kernel {
        x = refine_on_grid(&x, g, lower, opts);
        x = reduce_rank_on_boundary(&x, g, opts.rank_tol);
    }
    let mut best = candidate(x);
    let done = |b: &Candidate| b.rank <= lower && b.residual <= tol;
    let mut start = best.x.clone();
    for restart in 0..=opts.random_restarts {
        if done(&best) {
            break;
        }
        if restart > 0 {
            let c = random_objective(reduced.keep.len(), restart as u64);
            let Ok(prob) = SdpProblem::new(c, reduced.problem.constraints().to_vec()) else {
                break;
            };
            let Some(x) = usable(g, &reduced, &solve(&prob, &opts.solver), opts) else {
                continue;
            };
            let next = candidate(x);
            start = next.x.clone();
            if next.beats(&best, tol) {
                best = next;
            }
        }
        let mut current = start.clone();
        let mut delta = opts.reweight_delta;
        for _ in 0..opts.reweight_rounds {
            if done(&best) {
                break;
            }
            let next = reweighted_step(g, &reduced, &current, delta, opts);
            delta *= 0.1;
            let Some(next) = next else {
                continue;
            };
            let next = candidate(next);
            current = next.x.clone();
            if next.beats(&best, tol) {
                best = next;
            }
        }
    }
    let x = best.x;

    let squares = extract_squares(g, &x, opts.rank_tol);
    if squares.len() < lower {
        return Err(SosError::RankBelowBound {
            squares: squares.len(),
            rank_lower: lower,
        });
    }
    let reconstruction_error = coefficient_error(g.target(), &squares);
    let decomposition = SosDecomposition {
        certificate: RankCertificate::new(lower, Some(squares.len())),
        squares,
        gram: x,
        reconstruction_error,
    };
    Ok((decomposition, Some(sol)))
}

struct Candidate {
    x: DMatrix<f64>,
    rank: usize,
    residual: f64,
}

impl Candidate {
    /// Within tolerance beats out of tolerance; then lower rank; then
    /// smaller residual.
    fn beats(&self, other: &Candidate, tol: f64) -> bool {
        if other.residual.is_nan() {
            return !self.residual.is_nan();
        }
        match (self.residual <= tol, other.residual <= tol) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => (self.rank, self.residual) < (other.rank, other.residual),
            (false, false) => self.residual < other.residual,
        }
    }
}

/// One log-det (reweighted trace) round: minimize `tr((X_k + δI)^{-1} X)`
/// over the reduced problem, then polish and walk to the boundary.
fn reweighted_step(
    g: &GramSpace,
    reduced: &ReducedSdp,
    xk: &DMatrix<f64>,
    delta: f64,
    opts: &SosOptions,
) -> Option<DMatrix<f64>> {
    let m = reduced.keep.len();
    let xr = DMatrix::from_fn(m, m, |a, b| xk[(reduced.keep[a], reduced.keep[b])]);
    let (values, vectors) = sym_eigen(&xr);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let delta = delta * top.max(f64::MIN_POSITIVE);
    let mut w = DMatrix::zeros(m, m);
    for k in 0..m {
        let u = vectors.column(k);
        w.ger(top / (values[k].max(0.0) + delta), &u, &u, 1.0);
    }
    symmetrize_in_place(&mut w);
    let prob = SdpProblem::new(w, reduced.problem.constraints().to_vec()).ok()?;
    usable(g, reduced, &solve(&prob, &opts.solver), opts)
}

/// Any non-infeasible iterate is a candidate: polishing restores
/// feasibility, and candidates are later judged by their residual.
fn usable(
    g: &GramSpace,
    reduced: &ReducedSdp,
    sol: &SdpSolution,
    opts: &SosOptions,
) -> Option<DMatrix<f64>> {
    if sol.status == SdpStatus::Infeasible {
        return None;
    }
    let x = polish(g, &reduced.embed(&sol.x), opts.rank_tol);
    Some(reduce_rank_on_boundary(&x, g, opts.rank_tol))
}

/// `I + B^T B / m` for a seeded Gaussian-like `B`: a generic PSD objective
/// whose minimizers sit at different extreme points.
fn random_objective(m: usize, seed: u64) -> DMatrix<f64> {
    use rand::Rng;
    let mut r = rng(seed);
    let b = DMatrix::from_fn(m, m, |_, _| r.gen_range(-1.0..=1.0));
    let mut c = b.transpose() * &b / m.max(1) as f64;
    for i in 0..m {
        c[(i, i)] += 1.0;
    }
    c
}

fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Numerical rank: eigenvalues above `rel_tol * λ_max`.
fn rank(x: &DMatrix<f64>, rel_tol: f64) -> usize {
    let (values, _) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Drops every eigenvalue at or below `rel_tol * λ_max`.
fn truncate(x: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let (values, vectors) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        if values[k] > rel_tol * top {
            let u = vectors.column(k);
            out.ger(values[k], &u, &u, 1.0);
        }
    }
    out
}

/// Alternates PSD truncation and projection onto the Gram space until the
/// two agree; ends on the affine space.
fn polish(g: &GramSpace, x: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let mut x = truncate(x, rel_tol);
    for _ in 0..200 {
        let projected = g.project(&x);
        let truncated = truncate(&projected, rel_tol);
        let scale = max_abs(&projected).max(1.0);
        if max_abs(&(&truncated - &projected)) <= 1e-13 * scale {
            return projected;
        }
        x = truncated;
    }
    g.project(&x)
}

/// Factor refinement is skipped beyond this many unknowns (dense SVD).
const MAX_REFINE_UNKNOWNS: usize = 4000;

/// Gauss-Newton on a rank-`r` factor: with `X = L^T L` (`r` = numerical
/// rank), reduces the Gram-space residual of `L^T L` by minimum-norm steps
/// with backtracking. Returns the best iterate, which is PSD of rank at most
/// `r` by construction. Convergence is quadratic at regular points and slows
/// to linear where the constraints degenerate.
pub fn refine_factor(g: &GramSpace, x: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let (values, vectors) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let kept: Vec<usize> = (0..n)
        .filter(|&k| top > 0.0 && values[k] > rel_tol * top)
        .collect();
    if kept.is_empty() {
        return x.clone();
    }
    let r = kept.len();
    let zero = forced_zero_rows(g);
    let live: Vec<usize> = (0..n).filter(|&j| !zero[j]).collect();
    if r * live.len() > MAX_REFINE_UNKNOWNS {
        return x.clone();
    }
    let mut l = DMatrix::from_fn(r, n, |a, j| {
        if zero[j] {
            0.0
        } else {
            values[kept[a]].sqrt() * vectors[(j, kept[a])]
        }
    });
    let mut pos = vec![usize::MAX; n];
    for (p, &j) in live.iter().enumerate() {
        pos[j] = p;
    }
    let rhs: Vec<f64> = g
        .orbits()
        .iter()
        .map(|o| o.rhs.to_f64().unwrap_or(f64::NAN))
        .collect();
    let residual_of = |l: &DMatrix<f64>| {
        let x = l.transpose() * l;
        DVector::from_iterator(
            rhs.len(),
            g.orbits().iter().zip(&rhs).map(|(o, &b)| b - o.apply(&x)),
        )
    };
    let floor = 1e-14 * top.max(1.0);
    let mut res = residual_of(&l);
    for _ in 0..50 {
        if res.amax() <= floor {
            break;
        }
        let col = |a: usize, j: usize| a * live.len() + pos[j];
        let mut jac = DMatrix::zeros(rhs.len(), r * live.len());
        for (c, o) in g.orbits().iter().enumerate() {
            for &(i, j) in &o.cells {
                if zero[i] || zero[j] {
                    continue;
                }
                let w = o.weight((i, j)) as f64;
                for a in 0..r {
                    jac[(c, col(a, i))] += w * l[(a, j)];
                    jac[(c, col(a, j))] += w * l[(a, i)];
                }
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.amax();
        let Ok(step) = svd.solve(&res, 1e-9 * smax) else {
            break;
        };
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..20 {
            let mut next = l.clone();
            for a in 0..r {
                for &j in &live {
                    next[(a, j)] += t * step[col(a, j)];
                }
            }
            let next_res = residual_of(&next);
            if next_res.norm() < res.norm() {
                accepted = Some((next, next_res));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_res)) = accepted else {
            break;
        };
        let stalled = next_res.norm() > 0.99 * res.norm();
        l = next;
        res = next_res;
        if stalled {
            break;
        }
    }
    l.transpose() * &l
}

/// Directions `N = sum_k t_k A_k` with `N U_0 = 0`, where `U_0` spans the
/// null space of `x`. Moving along them keeps that null space.
fn face_directions(x: &DMatrix<f64>, kernel: &[DMatrix<f64>], rel_tol: f64) -> Vec<DMatrix<f64>> {
    let n = x.nrows();
    let (values, vectors) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let null: Vec<usize> = (0..n).filter(|&k| values[k] <= rel_tol * top).collect();
    if null.is_empty() {
        return kernel.to_vec();
    }
    let u0 = vectors.select_columns(&null);
    let range: Vec<usize> = (0..n).filter(|&k| values[k] > rel_tol * top).collect();
    let ur = vectors.select_columns(&range);
    let pr = &ur * ur.transpose();

    let k = kernel.len();
    let rows = n * null.len();
    let mut t = DMatrix::zeros(rows.max(k), k);
    for (c, a) in kernel.iter().enumerate() {
        let au = a * &u0;
        for (r, v) in au.iter().enumerate() {
            t[(r, c)] = *v;
        }
    }
    let svd = t.svd(false, true);
    let Some(v_t) = svd.v_t else {
        return Vec::new();
    };
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    (0..k)
        .filter(|&i| svd.singular_values[i] <= 1e-9 * smax.max(1.0))
        .map(|i| {
            let mut dir = DMatrix::zeros(n, n);
            for (c, a) in kernel.iter().enumerate() {
                dir += a * v_t[(i, c)];
            }
            // Strip round-off coupling to the null space.
            &pr * dir * &pr
        })
        .filter(|d| max_abs(d) > 1e-12)
        .collect()
}

/// Steps from `x` to the PSD boundary along Gram-space kernel directions
/// (both signs), accepting a step only when it strictly lowers the rank.
/// Stops when no such step exists; a no-op for an empty kernel.
pub fn reduce_rank_on_boundary(x: &DMatrix<f64>, g: &GramSpace, rank_tol: f64) -> DMatrix<f64> {
    if g.kernel_dim() == 0 {
        return x.clone();
    }
    let kernel: Vec<DMatrix<f64>> = g.kernel_basis().iter().map(|a| a.to_f64()).collect();
    let mut x = x.clone();
    let mut current = rank(&x, rank_tol);
    'outer: while current > 0 {
        for dir in face_directions(&x, &kernel, rank_tol) {
            for sign in [1.0, -1.0] {
                let step_dir = &dir * sign;
                let t = max_step_to_boundary_with_tol(&x, &step_dir, rank_tol);
                if !t.is_finite() || t <= 0.0 {
                    continue;
                }
                let candidate = g.project(&truncate(&(&x + &step_dir * t), rank_tol));
                let r = rank(&candidate, rank_tol);
                if r < current {
                    x = candidate;
                    current = r;
                    continue 'outer;
                }
            }
        }
        break;
    }
    x
}

/// (rank, sum of eigenvalues beyond the lower bound), or `None` if not PSD.
fn grid_score(x: &DMatrix<f64>, lower: usize, opts: &SosOptions) -> Option<(usize, f64)> {
    let (values, _) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    if values.is_empty() || values[0] < -opts.solver.psd_tol * top.max(1.0) {
        return None;
    }
    let r = values.iter().filter(|&&v| v > opts.rank_tol * top).count();
    let excess = values.len().saturating_sub(lower);
    let tail: f64 = values.iter().take(excess).map(|v| v.max(0.0)).sum();
    Some((r, tail))
}

fn better(a: (usize, f64), b: (usize, f64)) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.1 < b.1 * (1.0 - 1e-12),
    }
}

fn refine_on_grid(
    x: &DMatrix<f64>,
    g: &GramSpace,
    lower: usize,
    opts: &SosOptions,
) -> DMatrix<f64> {
    let kernel: Vec<DMatrix<f64>> = g.kernel_basis().iter().map(|a| a.to_f64()).collect();
    let m0 = g.representative().to_f64();
    let k = kernel.len();
    // Coordinates of x in the affine chart M0 + sum t_k A_k.
    let gram = DMatrix::from_fn(k, k, |i, j| kernel[i].dot(&kernel[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| kernel[i].dot(&(x - &m0)));
    let Some(mut t) = gram.cholesky().map(|c| c.solve(&rhs)) else {
        return x.clone();
    };
    let point = |t: &nalgebra::DVector<f64>| {
        let mut p = m0.clone();
        for (a, tk) in kernel.iter().zip(t.iter()) {
            p += a * *tk;
        }
        p
    };
    let Some(mut best) = grid_score(&point(&t), lower, opts) else {
        return x.clone();
    };
    let mut h = t.amax().max(1.0);
    for _ in 0..opts.refine_rounds {
        let mut improved = true;
        while improved {
            improved = false;
            for c in 0..k {
                for sign in [1.0, -1.0] {
                    let mut cand = t.clone();
                    cand[c] += sign * h;
                    if let Some(score) = grid_score(&point(&cand), lower, opts) {
                        if better(score, best) {
                            best = score;
                            t = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        h *= 0.5;
    }
    let refined = point(&t);
    if rank(&refined, opts.rank_tol) <= rank(x, opts.rank_tol) {
        refined
    } else {
        x.clone()
    }
}

/// Factors `x = L^T L` by eigendecomposition; row `i` of `L` times `V` is
/// the square `f_i`.
fn extract_squares(g: &GramSpace, x: &DMatrix<f64>, rel_tol: f64) -> Vec<RealPoly> {
    let alphabet = g.basis().alphabet();
    let words = g.basis().words();
    let (values, vectors) = sym_eigen(x);
    let top = values.iter().copied().fold(0.0_f64, f64::max);
    let mut squares: Vec<RealPoly> = (0..values.len())
        .filter(|&k| top > 0.0 && values[k] > rel_tol * top)
        .map(|k| {
            let s = values[k].sqrt();
            let f = RealPoly::from_terms(
                alphabet,
                words
                    .iter()
                    .zip(vectors.column(k).iter())
                    .map(|(w, &u)| (w.clone(), s * u)),
            )
            .prune(1e-14);
            match f.leading_term() {
                Some((_, &c)) if c < 0.0 => -f,
                _ => f,
            }
        })
        .collect();
    squares.sort_by(|a, b| {
        let la = a.leading_term().map(|(w, &c)| (w.clone(), c));
        let lb = b.leading_term().map(|(w, &c)| (w.clone(), c));
        match (la, lb) {
            (Some((wa, ca)), Some((wb, cb))) => wa.cmp(&wb).then(cb.total_cmp(&ca)),
            (a, b) => a.is_some().cmp(&b.is_some()),
        }
    });
    squares
}

fn coefficient_error(p: &NcPoly, squares: &[RealPoly]) -> f64 {
    let mut sum = RealPoly::zero(p.alphabet());
    for f in squares {
        sum = &sum + &(&f.adjoint() * f);
    }
    (&sum - &p.to_real()).max_abs_coeff()
}

/// Outcome of [`verify_decomposition`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// `max |coeff(sum f_i* f_i - p)|`.
    pub coefficient_error: f64,
    /// Smallest eigenvalue of `p(M)` over the sampled tuples.
    pub min_sample_eigenvalue: f64,
}

/// Re-expands the squares against `p` and samples `p` on 20 random tuples of
/// sizes 1..=3 (seeded) as a matrix-positivity spot check.
pub fn verify_decomposition(p: &NcPoly, d: &SosDecomposition, seed: u64) -> VerifyReport {
    let mut r = rng(seed);
    let n = p.alphabet().n();
    let min_sample_eigenvalue = (0..20)
        .map(|i| {
            let tuple = random_tuple(&mut r, n, 1 + i % 3);
            let m = evaluate(p, &tuple).expect("tuple matches alphabet");
            crate::linalg::min_eigenvalue(&m)
        })
        .fold(f64::INFINITY, f64::min);
    VerifyReport {
        coefficient_error: coefficient_error(p, &d.squares),
        min_sample_eigenvalue,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TermJson {
    pub coeff: f64,
    pub word: Vec<u32>,
}

/// Wire form of a decomposition (or of an infeasibility verdict).
#[derive(Clone, Debug, Serialize)]
pub struct SosJson {
    pub status: &'static str,
    pub squares: Vec<Vec<TermJson>>,
    pub rank_lower: usize,
    pub rank_upper: Option<usize>,
    pub certified: bool,
    pub reconstruction_error: Option<f64>,
}

impl SosDecomposition {
    pub fn to_json(&self) -> SosJson {
        SosJson {
            status: "ok",
            squares: self
                .squares
                .iter()
                .map(|f| {
                    f.terms()
                        .map(|(w, &c)| TermJson {
                            coeff: c,
                            word: w.letters().to_vec(),
                        })
                        .collect()
                })
                .collect(),
            rank_lower: self.certificate.lower,
            rank_upper: self.certificate.upper,
            certified: self.certificate.certified,
            reconstruction_error: Some(self.reconstruction_error),
        }
    }
}

impl SosJson {
    pub fn infeasible(rank_lower: usize) -> Self {
        SosJson {
            status: "infeasible",
            squares: Vec::new(),
            rank_lower,
            rank_upper: None,
            certified: false,
            reconstruction_error: None,
        }
    }
}
