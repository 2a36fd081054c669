//! Dense complex linear algebra on qudit operators.
//!
//! Everything here is a pure function on `nalgebra` matrices. Bipartite
//! vectors use the flat index `i * d_B + j` for `|i>_A (x) |j>_B`.

use std::f64::consts::PI;

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance used for equality and Hermiticity checks.
pub const TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Local dimensions of a bipartite system, ordered so that `d_a <= d_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    d_a: usize,
    d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDimension(format!("local dimensions must be positive, got {d_a}x{d_b}")));
        }
        if d_a > d_b {
            return Err(Error::InvalidDimension(format!("expected d_A <= d_B, got {d_a}x{d_b}; swap the subsystems")));
        }
        Ok(Self { d_a, d_b })
    }

    pub fn square(d: usize) -> Result<Self> {
        Self::new(d, d)
    }

    #[inline]
    pub fn d_a(&self) -> usize {
        self.d_a
    }

    #[inline]
    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// `d_A * d_B`, the dimension of the joint Hilbert space.
    #[inline]
    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.d_a == self.d_b
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.d_b + j
    }

    pub fn local(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.d_a,
            Subsystem::B => self.d_b,
        }
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.d_a, self.d_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// `exp(2 pi i k / d)` with `k` reduced modulo `d` first so that large
/// exponents do not lose precision.
#[inline]
pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64);
    if k == 0 {
        return ONE;
    }
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::InvalidDimension("local dimension must be positive".into()))
    } else {
        Ok(())
    }
}

/// `X^mu Z^nu` on a `d`-level system with `X|i> = |i+1>` and `Z|i> = w^i |i>`.
pub fn hw_operator(d: usize, mu: i64, nu: i64) -> Result<CMatrix> {
    check_dim(d)?;
    let shift = mu.rem_euclid(d as i64) as usize;
    let mut m = CMatrix::zeros(d, d);
    for c in 0..d {
        m[((c + shift) % d, c)] = root_of_unity(d, nu * c as i64);
    }
    Ok(m)
}

/// `Z~^nu` on `H_A`: the clock operator of `H_A` but with the root of unity of `H_B`.
pub fn modified_clock(d_a: usize, d_b: usize, nu: i64) -> Result<CMatrix> {
    check_dim(d_a)?;
    check_dim(d_b)?;
    let mut m = CMatrix::zeros(d_a, d_a);
    for i in 0..d_a {
        m[(i, i)] = root_of_unity(d_b, nu * i as i64);
    }
    Ok(m)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Thin SVD `m = u * diag(s) * v_t`, singular values in non-increasing order, with `u` of size `rows x k`, `v_t` of size `k x cols`
/// and `k = min(rows, cols)`.
pub struct ThinSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CMatrix,
}

pub fn thin_svd(m: &CMatrix) -> Result<ThinSvd> {
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD returned no left vectors".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD returned no right vectors".into()))?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    if order.iter().enumerate().all(|(k, &o)| k == o) {
        return Ok(ThinSvd { u, singular_values: s.iter().copied().collect(), v_t });
    }
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v_sorted = CMatrix::from_fn(order.len(), v_t.ncols(), |k, c| v_t[(order[k], c)]);
    Ok(ThinSvd { u: u_sorted, singular_values: order.iter().map(|&k| s[k]).collect(), v_t: v_sorted })
}

/// `||M||_1`, the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Largest entry of `|a - b|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Returns `(M + M^dagger)/2`, rejecting matrices whose anti-Hermitian part
/// exceeds [`TOL`].
pub fn hermitian_part(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let defect = hermiticity_defect(m);
    if defect > TOL {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    Ok((m + m.adjoint()).scale(0.5))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let h = hermitian_part(m)?;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigendecomposition did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue_hermitian(m: &CMatrix) -> Result<f64> {
    hermitian_eigenvalues(m)?.first().copied().ok_or_else(|| Error::InvalidInput("empty matrix".into()))
}

/// Transposes the chosen tensor factor of an operator on `H_A (x) H_B`.
pub fn partial_transpose(rho: &CMatrix, dims: BipartiteDims, side: Subsystem) -> Result<CMatrix> {
    let n = dims.total();
    if rho.shape() != (n, n) {
        return Err(Error::mismatch(format!("{n}x{n}"), format!("{}x{}", rho.nrows(), rho.ncols())));
    }
    let (da, db) = (dims.d_a(), dims.d_b());
    let mut out = CMatrix::zeros(n, n);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let v = rho[(i * db + j, k * db + l)];
                    let (r, c) = match side {
                        Subsystem::A => (k * db + j, i * db + l),
                        Subsystem::B => (i * db + l, k * db + j),
                    };
                    out[(r, c)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Rejects matrices with NaN or infinite entries.
pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Builds a matrix from row-major complex rows, validating shape and finiteness.
pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<CMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("ragged or empty rows".into()));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hw_identity_and_qubit_xz() {
        assert_eq!(hw_operator(2, 0, 0).unwrap(), identity(2));
        // X Z for d = 2: Z = diag(1, -1), X swaps.
        let xz = hw_operator(2, 1, 1).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)]);
        assert!(max_abs_diff(&xz, &expected) < 1e-15);
    }

    #[test]
    fn hw_exponents_reduce_mod_d() {
        for d in 2..6 {
            for (mu, nu) in [(1, 2), (-1, 3), (4, -7)] {
                let a = hw_operator(d, mu, nu).unwrap();
                let b = hw_operator(d, mu + d as i64, nu + d as i64).unwrap();
                assert!(max_abs_diff(&a, &b) < 1e-14);
            }
        }
    }

    #[test]
    fn hw_zero_dimension_rejected() {
        assert!(matches!(hw_operator(0, 0, 0), Err(Error::InvalidDimension(_))));
        assert!(modified_clock(0, 2, 1).is_err());
    }

    #[test]
    fn hw_unitary_and_orthogonal() {
        for d in 2..=6 {
            let ops: Vec<CMatrix> = (0..d)
                .flat_map(|a| (0..d).map(move |b| (a as i64, b as i64)))
                .map(|(a, b)| hw_operator(d, a, b).unwrap())
                .collect();
            for (p, op) in ops.iter().enumerate() {
                assert!(max_abs_diff(&(op.adjoint() * op), &identity(d)) < 1e-12);
                for (q, other) in ops.iter().enumerate() {
                    let ip = (op.adjoint() * other).trace();
                    let expected = if p == q { d as f64 } else { 0.0 };
                    assert!((ip - c(expected, 0.0)).norm() < 1e-12, "d={d} p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn clock_shift_commutation() {
        for d in 2..=5 {
            for mu in 0..d as i64 {
                for nu in 0..d as i64 {
                    let zx = hw_operator(d, 0, nu).unwrap() * hw_operator(d, mu, 0).unwrap();
                    let xz = hw_operator(d, mu, nu).unwrap() * root_of_unity(d, mu * nu);
                    assert!(max_abs_diff(&zx, &xz) < 1e-12);
                }
            }
        }
        // Z~^nu X_A^mu = w_B^{mu nu} X_A^mu Z~^nu
        for (da, db) in [(2, 3), (3, 5), (4, 6)] {
            for mu in 0..da as i64 {
                for nu in 0..db as i64 {
                    let x = hw_operator(da, mu, 0).unwrap();
                    let z = modified_clock(da, db, nu).unwrap();
                    let lhs = &z * &x;
                    let rhs = (&x * &z) * root_of_unity(db, mu * nu);
                    // Only holds on indices that do not wrap around d_A.
                    for col in 0..da - mu as usize {
                        let row = col + mu as usize;
                        assert!((lhs[(row, col)] - rhs[(row, col)]).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn modified_clock_examples() {
        let z = modified_clock(2, 3, 1).unwrap();
        assert!((z[(0, 0)] - ONE).norm() < 1e-15);
        assert!((z[(1, 1)] - C64::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-15);
        assert!(max_abs_diff(&modified_clock(2, 3, 3).unwrap(), &identity(2)) < 1e-14);
        for d in 2..6 {
            for nu in 0..d as i64 {
                let a = modified_clock(d, d, nu).unwrap();
                let b = hw_operator(d, 0, nu).unwrap();
                assert!(max_abs_diff(&a, &b) < 1e-15);
            }
        }
    }

    #[test]
    fn kron_examples() {
        let two = CMatrix::from_element(1, 1, c(2.0, 0.0));
        assert_eq!(kron(&two, &identity(2)), identity(2) * c(2.0, 0.0));

        let x = hw_operator(2, 1, 0).unwrap();
        let xx = kron(&x, &x);
        let mut ket00 = CVector::zeros(4);
        ket00[0] = ONE;
        let out = &xx * &ket00;
        assert!((out[3] - ONE).norm() < 1e-15);
        assert!(out.iter().take(3).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m: Vec<CMatrix> = (0..4).map(|_| sample::ginibre(&mut rng, 2, 2)).collect();
        let lhs = kron(&m[0], &m[1]) * kron(&m[2], &m[3]);
        let rhs = kron(&(&m[0] * &m[2]), &(&m[1] * &m[3]));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn trace_norm_examples() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-2.0, 0.0)]));
        assert!((trace_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..6 {
            let u = sample::haar_unitary(&mut rng, n);
            assert!((trace_norm(&u).unwrap() - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_matches_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = sample::ginibre(&mut rng, 3, 5);
            let gram = &m * m.adjoint();
            let oracle: f64 = hermitian_eigenvalues(&gram).unwrap().iter().map(|l| l.max(0.0).sqrt()).sum();
            assert!((trace_norm(&m).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = sample::ginibre(&mut rng, 4, 6);
            let u = sample::haar_unitary(&mut rng, 4);
            let v = sample::haar_unitary(&mut rng, 6);
            let a = trace_norm(&m).unwrap();
            let b = trace_norm(&(u * &m * v)).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_transpose_examples() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let mixed = identity(6) / c(6.0, 0.0);
        for side in [Subsystem::A, Subsystem::B] {
            assert!(max_abs_diff(&partial_transpose(&mixed, dims, side).unwrap(), &mixed) < 1e-15);
        }

        let d2 = BipartiteDims::square(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let phi = CVector::from_vec(vec![c(s, 0.), ZERO, ZERO, c(s, 0.)]);
        let rho = &phi * phi.adjoint();
        let pt = partial_transpose(&rho, d2, Subsystem::B).unwrap();
        assert!((min_eigenvalue_hermitian(&pt).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_involution_trace_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let dims = BipartiteDims::new(2, 3).unwrap();
        for _ in 0..10 {
            let rho = sample::random_density(&mut rng, dims, 6);
            for side in [Subsystem::A, Subsystem::B] {
                let pt = partial_transpose(rho.matrix(), dims, side).unwrap();
                assert!((pt.trace() - ONE).norm() < 1e-12);
                assert!(hermiticity_defect(&pt) < 1e-12);
                let back = partial_transpose(&pt, dims, side).unwrap();
                assert!(max_abs_diff(&back, rho.matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn partial_transpose_rejects_wrong_size() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        assert!(partial_transpose(&identity(4), dims, Subsystem::B).is_err());
    }

    #[test]
    fn min_eigenvalue_examples() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1., 0.), c(2., 0.), c(3., 0.)]));
        assert!((min_eigenvalue_hermitian(&d).unwrap() - 1.0).abs() < 1e-14);
        let x = hw_operator(2, 1, 0).unwrap();
        assert!((min_eigenvalue_hermitian(&x).unwrap() + 1.0).abs() < 1e-14);
        assert!(min_eigenvalue_hermitian(&CMatrix::zeros(2, 3)).is_err());
        assert!(min_eigenvalue_hermitian(&hw_operator(3, 0, 1).unwrap()).is_err());
    }

    #[test]
    fn spectrum_brackets_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..7 {
            let g = sample::ginibre(&mut rng, n, n);
            let h = (&g + g.adjoint()) * c(0.5, 0.0);
            let ev = hermitian_eigenvalues(&h).unwrap();
            let mean = h.trace().re / n as f64;
            assert!(ev[0] <= mean + 1e-12 && mean <= ev[n - 1] + 1e-12);
            let sum: f64 = ev.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn dims_ordering_enforced() {
        assert!(BipartiteDims::new(3, 2).is_err());
        assert!(BipartiteDims::new(0, 2).is_err());
        let d = BipartiteDims::new(4, 6).unwrap();
        assert_eq!(d.total(), 24);
        assert_eq!(d.flat(1, 2), 8);
    }

    #[test]
    fn matrix_from_rows_validates() {
        assert!(matrix_from_rows(&[vec![ONE, ZERO], vec![ONE]]).is_err());
        assert!(matrix_from_rows(&[vec![c(f64::NAN, 0.)]]).is_err());
        let m = matrix_from_rows(&[vec![ONE, ZERO], vec![ZERO, ONE]]).unwrap();
        assert_eq!(m, identity(2));
    }
}
