//! Correlation matrices over the product Heisenberg-Weyl basis and the
//! trace-norm separability criteria built on them.
//!
//! Local bases are ordered as `B_i^A = X^{floor(i/d_A)} Z^i` and
//! `B_j^B = X^{floor(j/d_B)} Z^{-j}`, so that `B_0 = 1` and
//! `Tr(B_i^dagger B_j) = d delta_ij`.

use serde::Serialize;

use crate::bds::{bell_state, ProbabilityMatrix};
use crate::error::{Error, Result};
use crate::qlinalg::{
    hw_operator, min_eigenvalue_hermitian, partial_transpose, root_of_unity, trace_norm, BipartiteDims, CMatrix,
    Subsystem, C64, TOL, ZERO,
};
use crate::state::DensityMatrix;

/// Monomial `X^shift Z^phase` acting as `|c> -> w^{phase c} |c + shift>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalMonomial {
    pub d: usize,
    pub shift: usize,
    pub phase: usize,
}

impl LocalMonomial {
    pub fn for_index(d: usize, side: Subsystem, i: usize) -> Result<Self> {
        if i >= d * d {
            return Err(Error::InvalidInput(format!("basis index {i} out of range for local dimension {d}")));
        }
        let shift = i / d;
        let phase = match side {
            Subsystem::A => i % d,
            Subsystem::B => (d - i % d) % d,
        };
        Ok(Self { d, shift, phase })
    }

    #[inline]
    pub fn target(&self, c: usize) -> usize {
        (c + self.shift) % self.d
    }

    /// Exponent `phase * c` reduced modulo `d`.
    #[inline]
    pub fn exponent(&self, c: usize) -> usize {
        (self.phase * c) % self.d
    }

    pub fn matrix(&self) -> CMatrix {
        hw_operator(self.d, self.shift as i64, self.phase as i64).expect("valid dimension")
    }
}

/// `B_i` of the chosen subsystem.
pub fn basis_operator(dims: BipartiteDims, side: Subsystem, i: usize) -> Result<CMatrix> {
    Ok(LocalMonomial::for_index(dims.local(side), side, i)?.matrix())
}

/// `c_ij = Tr((B_i^A (x) B_j^B)^dagger rho)`, a `d_A^2 x d_B^2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dims: BipartiteDims,
    c: CMatrix,
}

impl CorrelationMatrix {
    pub fn new(dims: BipartiteDims, c: CMatrix) -> Result<Self> {
        let (ra, rb) = (dims.d_a() * dims.d_a(), dims.d_b() * dims.d_b());
        if c.shape() != (ra, rb) {
            return Err(Error::mismatch(format!("{ra}x{rb}"), format!("{}x{}", c.nrows(), c.ncols())));
        }
        if (c[(0, 0)] - C64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidInput(format!("c_00 must be 1, got {}", c[(0, 0)])));
        }
        Ok(Self { dims, c })
    }

    pub(crate) fn from_trusted(dims: BipartiteDims, c: CMatrix) -> Self {
        Self { dims, c }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    /// `D_x C D_y`: the first row scaled by `x`, the first column by `y`.
    pub fn scaled(&self, x: f64, y: f64) -> CMatrix {
        scale_first(&self.c, x, y)
    }

    /// Correlation matrix of `(1 - eps) rho + eps 1/(d_A d_B)`.
    pub fn with_white_noise(&self, eps: f64) -> Self {
        let mut c = self.c.scale(1.0 - eps);
        c[(0, 0)] += C64::new(eps, 0.0);
        Self { dims: self.dims, c }
    }

    /// `(1/(d_A d_B)) sum c_ij B_i^A (x) B_j^B`.
    pub fn reconstruct(&self) -> CMatrix {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let n = self.dims.total();
        let mut rho = CMatrix::zeros(n, n);
        for i in 0..da * da {
            let a = LocalMonomial::for_index(da, Subsystem::A, i).expect("in range");
            for j in 0..db * db {
                let c = self.c[(i, j)];
                if c.norm() == 0.0 {
                    continue;
                }
                let b = LocalMonomial::for_index(db, Subsystem::B, j).expect("in range");
                for ca in 0..da {
                    for cb in 0..db {
                        let w = root_of_unity(da, a.exponent(ca) as i64) * root_of_unity(db, b.exponent(cb) as i64);
                        rho[(self.dims.flat(a.target(ca), b.target(cb)), self.dims.flat(ca, cb))] += c * w;
                    }
                }
            }
        }
        rho / C64::new(n as f64, 0.0)
    }
}

pub(crate) fn scale_first(c: &CMatrix, x: f64, y: f64) -> CMatrix {
    let mut m = c.clone();
    for j in 0..m.ncols() {
        m[(0, j)] *= x;
    }
    for i in 0..m.nrows() {
        m[(i, 0)] *= y;
    }
    m
}

/// Correlation matrix of an arbitrary operator on `H_A (x) H_B`, exploiting
/// that every basis element is a monomial matrix.
pub fn correlation_of_operator(rho: &CMatrix, dims: BipartiteDims) -> Result<CMatrix> {
    let (da, db) = (dims.d_a(), dims.d_b());
    if rho.shape() != (dims.total(), dims.total()) {
        return Err(Error::mismatch(dims.total(), rho.nrows()));
    }
    let a_ops: Vec<LocalMonomial> =
        (0..da * da).map(|i| LocalMonomial::for_index(da, Subsystem::A, i).expect("in range")).collect();
    let b_ops: Vec<LocalMonomial> =
        (0..db * db).map(|j| LocalMonomial::for_index(db, Subsystem::B, j).expect("in range")).collect();
    let roots_a: Vec<C64> = (0..da).map(|k| root_of_unity(da, -(k as i64))).collect();
    let roots_b: Vec<C64> = (0..db).map(|k| root_of_unity(db, -(k as i64))).collect();
    let mut c = CMatrix::zeros(da * da, db * db);
    for (i, a) in a_ops.iter().enumerate() {
        for (j, b) in b_ops.iter().enumerate() {
            // Tr(U^dagger rho) = sum_col conj(U[row(col), col]) rho[row(col), col]
            let mut acc = ZERO;
            for ca in 0..da {
                let ra = a.target(ca);
                let pa = roots_a[a.exponent(ca)];
                for cb in 0..db {
                    let v = rho[(dims.flat(ra, b.target(cb)), dims.flat(ca, cb))];
                    acc += v * pa * roots_b[b.exponent(cb)];
                }
            }
            c[(i, j)] = acc;
        }
    }
    Ok(c)
}

pub fn correlation_matrix(rho: &DensityMatrix) -> CorrelationMatrix {
    let c = correlation_of_operator(rho.matrix(), rho.dims()).expect("shape checked by DensityMatrix");
    CorrelationMatrix::from_trusted(rho.dims(), c)
}

/// Correlation matrices of the individual Bell projectors, stored sparsely, so
/// that the correlation matrix of any Bell diagonal state is a weighted sum.
#[derive(Debug, Clone)]
pub struct BdsCorrelationKernel {
    dims: BipartiteDims,
    terms: Vec<Vec<(usize, usize, C64)>>,
}

impl BdsCorrelationKernel {
    pub fn new(dims: BipartiteDims) -> Self {
        let mut terms = Vec::with_capacity(dims.total());
        for a in 0..dims.d_a() {
            for b in 0..dims.d_b() {
                let v = bell_state(dims, a, b).expect("in range");
                let c = correlation_of_operator(&(&v * v.adjoint()), dims).expect("shape");
                let mut t = Vec::new();
                for i in 0..c.nrows() {
                    for j in 0..c.ncols() {
                        if c[(i, j)].norm() > 1e-13 {
                            t.push((i, j, c[(i, j)]));
                        }
                    }
                }
                terms.push(t);
            }
        }
        Self { dims, terms }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// Sparse entries of the correlation matrix of `|phi^{ab}>`.
    pub fn bell_terms(&self, alpha: usize, beta: usize) -> &[(usize, usize, C64)] {
        &self.terms[alpha * self.dims.d_b() + beta]
    }

    /// Correlation matrix of `sum_k w_k |phi^{cell_k}><phi^{cell_k}|`.
    pub fn weighted(&self, cells: &[(usize, usize)], weights: &[f64]) -> CMatrix {
        let d = self.dims;
        let mut c = CMatrix::zeros(d.d_a() * d.d_a(), d.d_b() * d.d_b());
        for (&(a, b), &w) in cells.iter().zip(weights) {
            for &(i, j, z) in self.bell_terms(a, b) {
                c[(i, j)] += z * w;
            }
        }
        c
    }

    pub fn correlation(&self, p: &ProbabilityMatrix) -> CorrelationMatrix {
        let d = self.dims;
        let mut cells = Vec::new();
        let mut weights = Vec::new();
        for a in 0..d.d_a() {
            for b in 0..d.d_b() {
                if p.get(a, b) != 0.0 {
                    cells.push((a, b));
                    weights.push(p.get(a, b));
                }
            }
        }
        CorrelationMatrix::from_trusted(d, self.weighted(&cells, &weights))
    }
}

/// `R(x, y) = sqrt(d_A - 1 + x^2) sqrt(d_B - 1 + y^2)`.
pub fn ssc_bound(dims: BipartiteDims, x: f64, y: f64) -> f64 {
    ((dims.d_a() as f64 - 1.0 + x * x) * (dims.d_b() as f64 - 1.0 + y * y)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SscResult {
    pub x: f64,
    pub y: f64,
    pub bound: f64,
    pub norm: f64,
    pub g: f64,
}

impl SscResult {
    /// Violation normalized by the bound, `g / R(x, y)`.
    pub fn relative(&self) -> f64 {
        self.g / self.bound
    }

    pub fn detected(&self) -> bool {
        self.g < -TOL
    }
}

fn check_xy(x: f64, y: f64) -> Result<()> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidInput(format!("x and y must be finite and nonnegative, got ({x}, {y})")));
    }
    Ok(())
}

/// `g(x, y) = R(x, y) - ||D_x C D_y||_1`; negative values certify entanglement.
pub fn ssc_value(c: &CorrelationMatrix, x: f64, y: f64) -> Result<SscResult> {
    check_xy(x, y)?;
    let bound = ssc_bound(c.dims(), x, y);
    let norm = trace_norm(&c.scaled(x, y))?;
    Ok(SscResult { x, y, bound, norm, g: bound - norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionReport {
    pub value: f64,
    pub threshold: f64,
    pub detected: bool,
}

impl CriterionReport {
    fn new(value: f64, threshold: f64) -> Self {
        Self { value, threshold, detected: value > threshold + TOL }
    }
}

/// Realignment criterion: `||C||_1` against `sqrt(d_A d_B)`.
pub fn ccnr(rho: &DensityMatrix) -> Result<CriterionReport> {
    ccnr_from_correlation(&correlation_matrix(rho))
}

pub fn ccnr_from_correlation(c: &CorrelationMatrix) -> Result<CriterionReport> {
    let d = c.dims();
    Ok(CriterionReport::new(trace_norm(c.matrix())?, ((d.d_a() * d.d_b()) as f64).sqrt()))
}

/// de Vicente criterion: `||C||_1` with the first row and column removed,
/// against `sqrt((d_A - 1)(d_B - 1))`.
pub fn de_vicente(rho: &DensityMatrix) -> Result<CriterionReport> {
    de_vicente_from_correlation(&correlation_matrix(rho))
}

pub fn de_vicente_from_correlation(c: &CorrelationMatrix) -> Result<CriterionReport> {
    let d = c.dims();
    let threshold = (((d.d_a() - 1) * (d.d_b() - 1)) as f64).sqrt();
    Ok(CriterionReport::new(trace_norm(&c.scaled(0.0, 0.0))?, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptReport {
    pub min_eig: f64,
    pub is_ppt: bool,
}

/// Smallest eigenvalue of `rho^{T_B}`; PPT iff it is at least `-1e-10`.
pub fn ppt_check(rho: &DensityMatrix) -> Result<PptReport> {
    let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::B)?;
    let min_eig = min_eigenvalue_hermitian(&pt)?;
    Ok(PptReport { min_eig, is_ppt: min_eig >= -TOL })
}
