use crate::error::{Error, Result};
use crate::qlinalg::{
    ensure_finite, hermitian_part, kron, min_eigenvalue_hermitian, BipartiteDims, CMatrix, CVector, C64, TOL,
};

/// A unit-trace Hermitian operator on `H_A (x) H_B`.
///
/// Positivity is not checked on construction (it needs a full
/// eigendecomposition); call [`DensityMatrix::check_positive`] when the input
/// is untrusted.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: BipartiteDims) -> Result<Self> {
        let n = dims.total();
        if matrix.shape() != (n, n) {
            return Err(Error::mismatch(
                format!("{n}x{n} for dims {dims}"),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        ensure_finite(&matrix)?;
        let matrix = hermitian_part(&matrix)?;
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidInput(format!("density matrix must have unit trace, got {tr}")));
        }
        Ok(Self { dims, matrix })
    }

    /// Wraps a matrix already known to be Hermitian with unit trace.
    pub(crate) fn from_trusted(matrix: CMatrix, dims: BipartiteDims) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.total());
        Self { dims, matrix }
    }

    pub fn from_pure(psi: &CVector, dims: BipartiteDims) -> Result<Self> {
        if psi.len() != dims.total() {
            return Err(Error::mismatch(dims.total(), psi.len()));
        }
        let norm = psi.norm();
        if norm < TOL {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self::from_trusted(&v * v.adjoint(), dims))
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self::from_trusted(CMatrix::identity(n, n).unscale(n as f64), dims)
    }

    pub fn product(rho_a: &CMatrix, rho_b: &CMatrix, dims: BipartiteDims) -> Result<Self> {
        if rho_a.shape() != (dims.d_a(), dims.d_a()) || rho_b.shape() != (dims.d_b(), dims.d_b()) {
            return Err(Error::mismatch(
                format!("local factors of sizes {} and {}", dims.d_a(), dims.d_b()),
                format!("{} and {}", rho_a.nrows(), rho_b.nrows()),
            ));
        }
        Self::new(kron(rho_a, rho_b), dims)
    }

    /// `(1 - eps) rho + eps 1/(d_A d_B)`.
    pub fn with_white_noise(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidInput(format!("noise fraction {eps} outside [0, 1]")));
        }
        let n = self.dims.total();
        let mut m = self.matrix.scale(1.0 - eps);
        for i in 0..n {
            m[(i, i)] += C64::new(eps / n as f64, 0.0);
        }
        Ok(Self::from_trusted(m, self.dims))
    }

    /// Convex combination `sum_k w_k rho_k`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let dims = first.1.dims;
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TOL {
            return Err(Error::InvalidInput("mixture weights must form a distribution".into()));
        }
        let mut m = CMatrix::zeros(dims.total(), dims.total());
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::mismatch(dims, rho.dims));
            }
            m += rho.matrix.scale(*w);
        }
        Ok(Self::from_trusted(m, dims))
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue_hermitian(&self.matrix)
    }

    pub fn check_positive(&self) -> Result<()> {
        let m = self.min_eigenvalue()?;
        if m < -TOL {
            Err(Error::InvalidInput(format!("density matrix has negative eigenvalue {m:.3e}")))
        } else {
            Ok(())
        }
    }

    /// `<psi| rho |psi>`, real part.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}
