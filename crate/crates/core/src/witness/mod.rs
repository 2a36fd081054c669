//! SSC entanglement witnesses.
//!
//! For a correlation matrix `C` and weights `(x, y)` every contraction `U`
//! (`||U||_inf <= 1`) yields a witness whose expectation on a state is
//! `R(x, y) + Re <D_x C D_y, U>`. The SVD-optimal `U` attains `g(x, y)`.

mod grid;
mod scan;
mod sparse;

pub use grid::Axis;
pub use scan::{measurement_filtration, measurement_filtration_sets, scan_noise_threshold, FiltrationMap, NoiseScan};
pub use sparse::{select_support, sparse_witness, SparseOptions, SparseOutcome, SparseSolver};

use serde::Serialize;

use crate::criteria::{correlation_matrix, scale_first, ssc_bound, ssc_value, CorrelationMatrix, LocalMonomial};
use crate::error::{Error, Result};
use crate::qlinalg::{operator_norm, root_of_unity, thin_svd, BipartiteDims, CMatrix, Subsystem, C64, TOL, ZERO};
use crate::state::DensityMatrix;

/// Default bisection tolerance for noise thresholds.
pub const DEFAULT_NOISE_TOL: f64 = 1e-5;

/// Threshold below which a witness value counts as a detection.
pub const DETECTION_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IsometryKind {
    /// `U U^dagger = 1`.
    Full,
    /// Only `||U||_inf <= 1`, as produced by the sparse optimization.
    Contraction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    u: CMatrix,
    kind: IsometryKind,
}

impl Isometry {
    /// Validates the shape and the contraction property.
    pub fn new(u: CMatrix, dims: BipartiteDims, kind: IsometryKind) -> Result<Self> {
        let (ra, rb) = (dims.d_a() * dims.d_a(), dims.d_b() * dims.d_b());
        if u.shape() != (ra, rb) {
            return Err(Error::mismatch(format!("{ra}x{rb}"), format!("{}x{}", u.nrows(), u.ncols())));
        }
        match kind {
            IsometryKind::Full => {
                let defect = crate::qlinalg::max_abs_diff(&(&u * u.adjoint()), &CMatrix::identity(ra, ra));
                if defect > 1e-8 {
                    return Err(Error::InvalidInput(format!("U U^dagger deviates from 1 by {defect:e}")));
                }
            }
            IsometryKind::Contraction => {
                let n = operator_norm(&u)?;
                if n > 1.0 + 1e-8 {
                    return Err(Error::InvalidInput(format!("||U||_inf = {n} exceeds 1")));
                }
            }
        }
        Ok(Self { u, kind })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }
}

fn check_xy(x: f64, y: f64) -> Result<()> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidInput(format!("x and y must be finite and nonnegative, got ({x}, {y})")));
    }
    Ok(())
}

/// `U = -A B^dagger` from the singular value decomposition
/// `D_x C D_y = A Sigma B^dagger`; minimizes `Re Tr(D_y U^dagger D_x C)`.
pub fn optimal_isometry(c: &CorrelationMatrix, x: f64, y: f64) -> Result<Isometry> {
    check_xy(x, y)?;
    let svd = thin_svd(&c.scaled(x, y))?;
    let u = -(svd.u * svd.v_t);
    Ok(Isometry { u, kind: IsometryKind::Full })
}

/// `Re Tr(D_y U^dagger D_x C) = Re <D_x C D_y, U>`.
pub fn isometry_objective(c: &CorrelationMatrix, u: &Isometry, x: f64, y: f64) -> f64 {
    frobenius_re(&c.scaled(x, y), u.matrix())
}

/// `Re sum conj(a_ij) b_ij`.
pub(crate) fn frobenius_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p.conj() * q).re).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOperator {
    dims: BipartiteDims,
    x: f64,
    y: f64,
    w: CMatrix,
    matrix: CMatrix,
}

impl WitnessOperator {
    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Coefficients `w_ij` in the product basis.
    pub fn coefficients(&self) -> &CMatrix {
        &self.w
    }

    /// `(1/2) sum (w_ij B_i (x) B_j + conj(w_ij) B_i^dagger (x) B_j^dagger)`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Re sum conj(c_ij) w_ij`, the expectation evaluated in coefficient space.
    pub fn expectation_from_correlation(&self, c: &CorrelationMatrix) -> Result<f64> {
        if c.dims() != self.dims {
            return Err(Error::mismatch(self.dims, c.dims()));
        }
        Ok(frobenius_re(c.matrix(), &self.w))
    }
}

/// `w_00 = x y U_00 + R`, `w_i0 = y U_i0`, `w_0j = x U_0j`, `w_ij = U_ij`.
pub fn witness_coefficients(u: &CMatrix, dims: BipartiteDims, x: f64, y: f64) -> CMatrix {
    let mut w = scale_first(u, x, y);
    w[(0, 0)] += C64::new(ssc_bound(dims, x, y), 0.0);
    w
}

pub fn build_witness(u: &Isometry, dims: BipartiteDims, x: f64, y: f64) -> Result<WitnessOperator> {
    check_xy(x, y)?;
    let (ra, rb) = (dims.d_a() * dims.d_a(), dims.d_b() * dims.d_b());
    if u.matrix().shape() != (ra, rb) {
        return Err(Error::mismatch(format!("{ra}x{rb}"), format!("{}x{}", u.matrix().nrows(), u.matrix().ncols())));
    }
    let w = witness_coefficients(u.matrix(), dims, x, y);
    let matrix = operator_from_coefficients(&w, dims);
    Ok(WitnessOperator { dims, x, y, w, matrix })
}

/// Hermitian part of `sum w_ij B_i^A (x) B_j^B`.
pub fn operator_from_coefficients(w: &CMatrix, dims: BipartiteDims) -> CMatrix {
    let (da, db) = (dims.d_a(), dims.d_b());
    let n = dims.total();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..da * da {
        let a = LocalMonomial::for_index(da, Subsystem::A, i).expect("in range");
        for j in 0..db * db {
            let coeff = w[(i, j)];
            if coeff == ZERO {
                continue;
            }
            let b = LocalMonomial::for_index(db, Subsystem::B, j).expect("in range");
            for ca in 0..da {
                let pa = root_of_unity(da, a.exponent(ca) as i64);
                for cb in 0..db {
                    let phase = pa * root_of_unity(db, b.exponent(cb) as i64);
                    m[(dims.flat(a.target(ca), b.target(cb)), dims.flat(ca, cb))] += coeff * phase;
                }
            }
        }
    }
    (&m + m.adjoint()).scale(0.5)
}

/// `Tr(W rho)`; the imaginary residue is discarded.
pub fn witness_expectation(w: &WitnessOperator, rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != w.dims {
        return Err(Error::mismatch(w.dims, rho.dims()));
    }
    let t = (w.matrix() * rho.matrix()).trace();
    if t.im.abs() > 1e-8 * (1.0 + t.re.abs()) {
        return Err(Error::Numerical(format!("witness expectation has imaginary part {:e}", t.im)));
    }
    Ok(t.re)
}

/// The witness optimal for `rho` at `(x, y)` together with its value `g(x, y)`.
pub fn optimal_witness(rho: &DensityMatrix, x: f64, y: f64) -> Result<(WitnessOperator, f64)> {
    let c = correlation_matrix(rho);
    let u = optimal_isometry(&c, x, y)?;
    let w = build_witness(&u, rho.dims(), x, y)?;
    let value = w.expectation_from_correlation(&c)?;
    Ok((w, value))
}

/// Largest `eps` such that `(1 - eps) rho + eps 1/(d_A d_B)` is still detected
/// at `(x, y)`, located by bisection to within `tol`.
///
/// Detection along the noise line is an interval `[0, eps_max)`: `g_eps` is
/// concave in `eps` (bound constant, trace norm of an affine function is
/// convex) and `g_1 = R - x y > 0`, so bisection is exact up to `tol`. The
/// returned value is the largest `eps` verified to be detected, or 0 when the
/// noiseless state is not detected.
pub fn noise_threshold(c: &CorrelationMatrix, x: f64, y: f64, tol: f64) -> Result<f64> {
    check_xy(x, y)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let detected = |eps: f64| -> Result<bool> { Ok(ssc_value(&c.with_white_noise(eps), x, y)?.g < -TOL) };
    if !detected(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if detected(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Sign of `g_eps` on `samples` equispaced points of `[0, 1]`; true when the
/// detected set is a prefix, i.e. consistent with a single interval.
pub fn detection_is_interval(c: &CorrelationMatrix, x: f64, y: f64, samples: usize) -> Result<bool> {
    let mut left_detect = true;
    for k in 0..samples {
        let eps = k as f64 / (samples - 1).max(1) as f64;
        let d = ssc_value(&c.with_white_noise(eps), x, y)?.g < -TOL;
        if d && !left_detect {
            return Ok(false);
        }
        left_detect = d;
    }
    Ok(true)
}
