//! Witnesses with few measurement terms.
//!
//! With `M = D_x C D_y`, a contraction `U` supported on a set `S` gives the
//! witness value `R(x, y) + Re <M, U>`. Minimizing over `||U||_inf <= 1` and
//! `supp U` in `S` is a convex problem, solved here by ADMM on the splitting
//! `U = W` (`U` carries the support, `W` the norm ball) with a duality-gap
//! certificate. `S` holds the `l` largest entries of `|M|` off `(0, 0)`; the
//! identity coefficient `U_00` is always free since measuring `1 (x) 1` costs
//! nothing.

use serde::Serialize;

use super::{build_witness, frobenius_re, Isometry, IsometryKind, WitnessOperator, DETECTION_SLACK};
use crate::criteria::{ssc_bound, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::qlinalg::{thin_svd, trace_norm, BipartiteDims, CMatrix, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseOptions {
    pub max_iter: usize,
    /// Stop once the duality gap falls below this value.
    pub gap_tol: f64,
    /// Iterations between certificate evaluations.
    pub check_every: usize,
    /// Stop as soon as detection is confirmed or ruled out, instead of
    /// driving the gap to `gap_tol`.
    pub stop_on_decision: bool,
}

impl Default for SparseOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, gap_tol: 1e-9, check_every: 10, stop_on_decision: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SparseSolver {
    /// Support entries in distinct rows and columns: optimum in closed form.
    ClosedForm,
    /// A bound alone decided detection.
    Bound,
    Admm {
        iterations: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOutcome {
    pub dims: BipartiteDims,
    pub x: f64,
    pub y: f64,
    pub ell: usize,
    /// The `l` selected positions, best first (excluding `(0, 0)`).
    pub support: Vec<(usize, usize)>,
    /// Witness value of the best feasible `U` found.
    pub value: f64,
    /// Certified lower bound on the optimal value.
    pub lower_bound: f64,
    pub u: CMatrix,
    pub solver: SparseSolver,
}

impl SparseOutcome {
    pub fn detected(&self) -> bool {
        self.value < -DETECTION_SLACK
    }

    /// True when the lower bound rules out detection or a feasible point confirms it.
    pub fn certified(&self) -> bool {
        self.detected() || self.lower_bound >= -DETECTION_SLACK
    }

    /// The witness for a detection, `None` otherwise.
    pub fn witness(&self) -> Result<Option<WitnessOperator>> {
        if !self.detected() {
            return Ok(None);
        }
        let u = Isometry::new(self.u.clone(), self.dims, IsometryKind::Contraction)?;
        Ok(Some(build_witness(&u, self.dims, self.x, self.y)?))
    }
}

/// Relative resolution below which magnitudes count as ties.
const TIE_RESOLUTION: f64 = 1e-10;

/// The `l` positions with largest `|M_ij|`, `(0, 0)` excluded; ties go to the
/// lower flat index `i * ncols + j`.
pub fn select_support(m: &CMatrix, ell: usize) -> Vec<(usize, usize)> {
    let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut cells: Vec<(i64, usize, usize, usize)> = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (i, j) == (0, 0) {
                continue;
            }
            let q = (m[(i, j)].norm() / scale / TIE_RESOLUTION).round() as i64;
            cells.push((-q, i * m.ncols() + j, i, j));
        }
    }
    cells.sort_unstable();
    cells.into_iter().take(ell).map(|(_, _, i, j)| (i, j)).collect()
}

fn ball_projection(m: &CMatrix) -> Result<CMatrix> {
    let svd = thin_svd(m)?;
    if svd.singular_values.first().copied().unwrap_or(0.0) <= 1.0 {
        return Ok(m.clone());
    }
    // Singular values clipped at 1.
    let mut us = svd.u.clone();
    for (k, s) in svd.singular_values.iter().enumerate() {
        let f = C64::new(s.min(1.0), 0.0);
        for r in 0..us.nrows() {
            us[(r, k)] *= f;
        }
    }
    Ok(us * svd.v_t)
}

fn mask_apply(m: &CMatrix, mask: &[bool]) -> CMatrix {
    let mut out = m.clone();
    for (z, keep) in out.iter_mut().zip(mask) {
        if !keep {
            *z = ZERO;
        }
    }
    out
}

/// ADMM iterate, reusable as a warm start for a larger support.
#[derive(Debug, Clone)]
pub(crate) struct AdmmState {
    w: CMatrix,
    y: CMatrix,
    rho: f64,
}

impl AdmmState {
    fn cold(rows: usize, cols: usize) -> Self {
        Self { w: CMatrix::zeros(rows, cols), y: CMatrix::zeros(rows, cols), rho: 1.0 }
    }
}

/// Scaled matrix, support mask (column-major, matching nalgebra storage) and
/// the positions with nonzero weight.
fn support_mask(m: &CMatrix, support: &[(usize, usize)]) -> Vec<bool> {
    let mut mask = vec![false; m.len()];
    mask[0] = true;
    for &(i, j) in support {
        mask[i + j * m.nrows()] = true;
    }
    mask
}

fn closed_form(m: &CMatrix, mask: &[bool]) -> Option<CMatrix> {
    let mut rows = vec![false; m.nrows()];
    let mut cols = vec![false; m.ncols()];
    let mut u = CMatrix::zeros(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !mask[i + j * m.nrows()] || z.norm() <= 1e-14 {
                continue;
            }
            if rows[i] || cols[j] {
                return None;
            }
            rows[i] = true;
            cols[j] = true;
            u[(i, j)] = -z / z.norm();
        }
    }
    Some(u)
}

/// `R + Re <M, U>` after scaling `U` into the unit operator-norm ball.
fn feasible_value(m: &CMatrix, u: &CMatrix, r: f64) -> Result<(f64, CMatrix)> {
    let n = thin_svd(u)?.singular_values.first().copied().unwrap_or(0.0);
    let u = if n > 1.0 { u.unscale(n) } else { u.clone() };
    Ok((r + frobenius_re(m, &u), u))
}

pub(crate) struct SolveResult {
    pub value: f64,
    pub lower_bound: f64,
    pub u: CMatrix,
    pub solver: SparseSolver,
    pub state: Option<AdmmState>,
}

pub(crate) fn solve(
    m: &CMatrix,
    r: f64,
    support: &[(usize, usize)],
    warm: Option<AdmmState>,
    opts: &SparseOptions,
) -> Result<SolveResult> {
    let mask = support_mask(m, support);
    let m_s = mask_apply(m, &mask);
    // |U_ij| <= ||U||_inf bounds every term: R - sum_S |M_ij| <= value.
    let trivial_lb = r - m_s.iter().map(|z| z.norm()).sum::<f64>();
    if let Some(u) = closed_form(m, &mask) {
        return Ok(SolveResult {
            value: trivial_lb,
            lower_bound: trivial_lb,
            u,
            solver: SparseSolver::ClosedForm,
            state: warm,
        });
    }
    let full_lb = r - trace_norm(m)?;
    let lb0 = trivial_lb.max(full_lb);
    if opts.stop_on_decision && lb0 >= -DETECTION_SLACK {
        return Ok(SolveResult {
            value: r,
            lower_bound: lb0,
            u: CMatrix::zeros(m.nrows(), m.ncols()),
            solver: SparseSolver::Bound,
            state: warm,
        });
    }

    let mut st = warm.unwrap_or_else(|| AdmmState::cold(m.nrows(), m.ncols()));
    let mut best_value = r;
    let mut best_u = CMatrix::zeros(m.nrows(), m.ncols());
    let mut lower = lb0;
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        iterations = k;
        let u = mask_apply(&(&st.w - &st.y - m.unscale(st.rho)), &mask);
        let w_old = st.w.clone();
        st.w = ball_projection(&(&u + &st.y))?;
        st.y += &u - &st.w;

        if k % opts.check_every == 0 || k == opts.max_iter {
            for cand in [u.clone(), mask_apply(&st.w, &mask)] {
                let (v, uf) = feasible_value(m, &cand, r)?;
                if v < best_value {
                    best_value = v;
                    best_u = uf;
                }
            }
            let mut z = st.y.scale(st.rho);
            for (zk, (mk, keep)) in z.iter_mut().zip(m.iter().zip(&mask)) {
                if *keep {
                    *zk = -*mk;
                }
            }
            lower = lower.max(r - trace_norm(&z)?);
            let decided = best_value < -DETECTION_SLACK || lower >= -DETECTION_SLACK;
            if (opts.stop_on_decision && decided) || best_value - lower < opts.gap_tol {
                break;
            }
            let primal = (&u - &st.w).norm();
            let dual = st.rho * (&st.w - &w_old).norm();
            if primal > 10.0 * dual {
                st.rho *= 2.0;
                st.y.unscale_mut(2.0);
            } else if dual > 10.0 * primal {
                st.rho /= 2.0;
                st.y.scale_mut(2.0);
            }
        }
    }
    Ok(SolveResult {
        value: best_value,
        lower_bound: lower,
        u: best_u,
        solver: SparseSolver::Admm { iterations },
        state: Some(st),
    })
}

pub(crate) fn check_ell(dims: BipartiteDims, ell: usize) -> Result<()> {
    let max = dims.d_a() * dims.d_a() * dims.d_b() * dims.d_b() - 1;
    if ell == 0 || ell > max {
        return Err(Error::InvalidInput(format!("number of measurement terms must lie in 1..={max}, got {ell}")));
    }
    Ok(())
}

/// Best witness whose coefficient matrix `U` has `l` free entries besides `U_00`.
pub fn sparse_witness(
    c: &CorrelationMatrix,
    x: f64,
    y: f64,
    ell: usize,
    opts: &SparseOptions,
) -> Result<SparseOutcome> {
    let dims = c.dims();
    check_ell(dims, ell)?;
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidInput(format!("x and y must be finite and nonnegative, got ({x}, {y})")));
    }
    let m = c.scaled(x, y);
    let support = select_support(&m, ell);
    let res = solve(&m, ssc_bound(dims, x, y), &support, None, opts)?;
    Ok(SparseOutcome {
        dims,
        x,
        y,
        ell,
        support,
        value: res.value,
        lower_bound: res.lower_bound,
        u: res.u,
        solver: res.solver,
    })
}
