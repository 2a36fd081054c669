//! Generalized Bell diagonal states and their Fourier picture.
//!
//! A Bell diagonal state on `d_A x d_B` (with `d_A <= d_B`) is a mixture of the
//! `d_A d_B` orthonormal vectors
//! `|phi^{ab}> = d_A^{-1/2} sum_i w_A^{a i} |i>|i + b mod d_B>`
//! and is described by its probability matrix `P` or equivalently by the
//! two-dimensional discrete Fourier transform `Lambda` of `P`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qlinalg::{
    hermitian_eigenvalues, hw_operator, kron, modified_clock, root_of_unity, BipartiteDims, CMatrix, CVector, C64, TOL,
    ZERO,
};
use crate::state::DensityMatrix;

/// Entries above `-CLAMP_TOL` are accepted as probabilities and clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Bell-state weights `p_{ab}`, stored as a `d_A x d_B` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    dims: BipartiteDims,
    p: DMatrix<f64>,
}

impl ProbabilityMatrix {
    pub fn new(dims: BipartiteDims, mut p: DMatrix<f64>) -> Result<Self> {
        if p.shape() != (dims.d_a(), dims.d_b()) {
            return Err(Error::mismatch(
                format!("{}x{}", dims.d_a(), dims.d_b()),
                format!("{}x{}", p.nrows(), p.ncols()),
            ));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotAProbabilityDistribution("non-finite entry".into()));
        }
        for x in p.iter_mut() {
            if *x < -CLAMP_TOL {
                return Err(Error::NotAProbabilityDistribution(format!("negative entry {x:e}")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total = p.sum();
        if (total - 1.0).abs() > TOL {
            return Err(Error::NotAProbabilityDistribution(format!("entries sum to {total}, expected 1")));
        }
        Ok(Self { dims, p })
    }

    /// Builds from rows; the dimensions are read off the row count and length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d_a = rows.len();
        let d_b = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d_b) {
            return Err(Error::InvalidInput("ragged probability matrix".into()));
        }
        let dims = BipartiteDims::new(d_a, d_b)?;
        Self::new(dims, DMatrix::from_fn(d_a, d_b, |i, j| rows[i][j]))
    }

    /// Weight `1/|S|` on each listed cell.
    pub fn uniform_on(dims: BipartiteDims, cells: &[(usize, usize)]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let mut p = DMatrix::zeros(dims.d_a(), dims.d_b());
        for &(a, b) in cells {
            if a >= dims.d_a() || b >= dims.d_b() {
                return Err(Error::InvalidInput(format!("cell ({a},{b}) outside {dims}")));
            }
            if p[(a, b)] != 0.0 {
                return Err(Error::InvalidInput(format!("duplicate cell ({a},{b})")));
            }
            p[(a, b)] = 1.0;
        }
        p /= cells.len() as f64;
        Self::new(dims, p)
    }

    pub fn uniform(dims: BipartiteDims) -> Self {
        let n = dims.total() as f64;
        Self { dims, p: DMatrix::from_element(dims.d_a(), dims.d_b(), 1.0 / n) }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn get(&self, alpha: usize, beta: usize) -> f64 {
        self.p[(alpha, beta)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// Fourier coefficients `lambda_{mu nu}` of a probability matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrix {
    dims: BipartiteDims,
    lambda: CMatrix,
}

impl FourierMatrix {
    /// Validates normalization, conjugate symmetry and `|lambda| <= 1`.
    ///
    /// These are necessary conditions only; whether `Lambda` comes from a
    /// probability distribution is decided by [`probabilities_from_fourier`].
    pub fn new(dims: BipartiteDims, lambda: CMatrix) -> Result<Self> {
        let (da, db) = (dims.d_a(), dims.d_b());
        if lambda.shape() != (da, db) {
            return Err(Error::mismatch(format!("{da}x{db}"), format!("{}x{}", lambda.nrows(), lambda.ncols())));
        }
        if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite Fourier coefficient".into()));
        }
        if (lambda[(0, 0)] - C64::new(1.0, 0.0)).norm() > TOL {
            return Err(Error::InvalidInput(format!("lambda_00 must be 1, got {}", lambda[(0, 0)])));
        }
        for mu in 0..da {
            for nu in 0..db {
                let z = lambda[(mu, nu)];
                let partner = lambda[((da - mu) % da, (db - nu) % db)];
                if (z - partner.conj()).norm() > TOL {
                    return Err(Error::InvalidInput(format!(
                        "lambda_({mu},{nu}) is not the conjugate of lambda_(-{mu},-{nu})"
                    )));
                }
                if z.norm() > 1.0 + TOL {
                    return Err(Error::InvalidInput(format!("|lambda_({mu},{nu})| = {} exceeds 1", z.norm())));
                }
            }
        }
        Ok(Self { dims, lambda })
    }

    /// Skips validation; for intermediate results such as Toeplitz test inputs.
    pub fn new_unchecked(dims: BipartiteDims, lambda: CMatrix) -> Self {
        Self { dims, lambda }
    }

    /// `lambda_{mu nu} = 1` everywhere: the Fourier matrix of `|phi^00>`.
    pub fn all_ones(dims: BipartiteDims) -> Self {
        Self::new_unchecked(dims, CMatrix::from_element(dims.d_a(), dims.d_b(), C64::new(1.0, 0.0)))
    }

    /// Only `lambda_00 = 1`: the maximally mixed state.
    pub fn delta(dims: BipartiteDims) -> Self {
        let mut l = CMatrix::zeros(dims.d_a(), dims.d_b());
        l[(0, 0)] = C64::new(1.0, 0.0);
        Self::new_unchecked(dims, l)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// Coefficient with indices taken modulo `d_A` and `d_B`.
    pub fn get(&self, mu: i64, nu: i64) -> C64 {
        let mu = mu.rem_euclid(self.dims.d_a() as i64) as usize;
        let nu = nu.rem_euclid(self.dims.d_b() as i64) as usize;
        self.lambda[(mu, nu)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.lambda
    }

    /// `sum |lambda_{mu nu}|`.
    pub fn l1_norm(&self) -> f64 {
        self.lambda.iter().map(|z| z.norm()).sum()
    }
}

/// `|phi^{ab}> = (Z_A^a (x) X_B^b) |phi^00>`.
pub fn bell_state(dims: BipartiteDims, alpha: usize, beta: usize) -> Result<CVector> {
    let (da, db) = (dims.d_a(), dims.d_b());
    if alpha >= da || beta >= db {
        return Err(Error::InvalidInput(format!("Bell index ({alpha},{beta}) outside {dims}")));
    }
    let mut v = CVector::zeros(dims.total());
    let amp = 1.0 / (da as f64).sqrt();
    for i in 0..da {
        v[dims.flat(i, (i + beta) % db)] = root_of_unity(da, (alpha * i) as i64) * amp;
    }
    Ok(v)
}

/// `rho_P = sum_{ab} p_{ab} |phi^{ab}><phi^{ab}|`.
pub fn bds_from_probabilities(p: &ProbabilityMatrix) -> DensityMatrix {
    let dims = p.dims();
    let n = dims.total();
    let mut rho = CMatrix::zeros(n, n);
    for a in 0..dims.d_a() {
        for b in 0..dims.d_b() {
            let w = p.get(a, b);
            if w == 0.0 {
                continue;
            }
            let v = bell_state(dims, a, b).expect("indices in range");
            rho.gerc(C64::new(w, 0.0), &v, &v, C64::new(1.0, 0.0));
        }
    }
    DensityMatrix::from_trusted(rho, dims)
}

/// Bell-basis weights `<phi^{ab}| rho |phi^{ab}>` of an arbitrary state.
pub fn bell_weights(rho: &DensityMatrix) -> Result<ProbabilityMatrix> {
    let dims = rho.dims();
    let mut p = DMatrix::zeros(dims.d_a(), dims.d_b());
    for a in 0..dims.d_a() {
        for b in 0..dims.d_b() {
            p[(a, b)] = rho.expectation(&bell_state(dims, a, b)?);
        }
    }
    ProbabilityMatrix::new(dims, p)
}

/// `lambda_{mu nu} = sum_{ab} p_{ab} w_A^{a mu} w_B^{b nu}`.
pub fn fourier_from_probabilities(p: &ProbabilityMatrix) -> FourierMatrix {
    let dims = p.dims();
    let (da, db) = (dims.d_a(), dims.d_b());
    let lambda = CMatrix::from_fn(da, db, |mu, nu| {
        let mut acc = ZERO;
        for a in 0..da {
            for b in 0..db {
                let w = p.get(a, b);
                if w != 0.0 {
                    acc += root_of_unity(da, (a * mu) as i64) * root_of_unity(db, (b * nu) as i64) * w;
                }
            }
        }
        acc
    });
    FourierMatrix::new_unchecked(dims, lambda)
}

/// Inverse transform `p_{ab} = (1/(d_A d_B)) sum lambda_{mu nu} w_A^{-a mu} w_B^{-b nu}`.
///
/// Fails when the result has an imaginary residue or a negative entry beyond
/// `1e-10`, i.e. when `Lambda` does not describe a state.
pub fn probabilities_from_fourier(lambda: &FourierMatrix) -> Result<ProbabilityMatrix> {
    let dims = lambda.dims();
    let (da, db) = (dims.d_a(), dims.d_b());
    let n = dims.total() as f64;
    let mut p = DMatrix::zeros(da, db);
    for a in 0..da {
        for b in 0..db {
            let mut acc = ZERO;
            for mu in 0..da {
                for nu in 0..db {
                    acc += lambda.matrix()[(mu, nu)]
                        * root_of_unity(da, -((a * mu) as i64))
                        * root_of_unity(db, -((b * nu) as i64));
                }
            }
            acc /= n;
            if acc.im.abs() > TOL {
                return Err(Error::NotAProbabilityDistribution(format!("p_({a},{b}) has imaginary part {:e}", acc.im)));
            }
            if acc.re < -TOL {
                return Err(Error::NotAProbabilityDistribution(format!("p_({a},{b}) = {:e} is negative", acc.re)));
            }
            p[(a, b)] = acc.re.max(0.0);
        }
    }
    ProbabilityMatrix::new(dims, p)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ToeplitzFailure {
    pub f_a: usize,
    pub f_b: usize,
    pub r: usize,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ToeplitzReport {
    pub pass: bool,
    pub first_failure: Option<ToeplitzFailure>,
}

/// `r x r` Toeplitz matrix with entries `lambda_{(m-n) f_A, (m-n) f_B}`.
pub fn toeplitz_matrix(lambda: &FourierMatrix, f_a: usize, f_b: usize, r: usize) -> CMatrix {
    CMatrix::from_fn(r, r, |m, n| {
        let k = m as i64 - n as i64;
        lambda.get(k * f_a as i64, k * f_b as i64)
    })
}

/// Herglotz-Bochner necessary conditions: every Toeplitz matrix of size
/// `2..=r_max` along every direction `(f_A, f_B)` must be positive semidefinite.
///
/// Failures are reported for the smallest size first, then by direction.
pub fn toeplitz_necessary_check(lambda: &FourierMatrix, r_max: usize) -> Result<ToeplitzReport> {
    if r_max < 2 {
        return Err(Error::InvalidInput("r_max must be at least 2".into()));
    }
    let dims = lambda.dims();
    for r in 2..=r_max {
        for f_a in 0..dims.d_a() {
            for f_b in 0..dims.d_b() {
                let t = toeplitz_matrix(lambda, f_a, f_b, r);
                // Hermitian only if Lambda is conjugate symmetric; symmetrize
                // so that the check stays meaningful on unchecked inputs.
                let t = (&t + t.adjoint()).scale(0.5);
                let min = hermitian_eigenvalues(&t)?[0];
                if min < -TOL {
                    return Ok(ToeplitzReport {
                        pass: false,
                        first_failure: Some(ToeplitzFailure { f_a, f_b, r, min_eigenvalue: min }),
                    });
                }
            }
        }
    }
    Ok(ToeplitzReport { pass: true, first_failure: None })
}

/// Default Toeplitz depth `d_A d_B`.
pub fn default_toeplitz_depth(dims: BipartiteDims) -> usize {
    dims.total().max(2)
}

/// Expansion of a Bell diagonal state over `X^mu Z^kappa (x) X^mu Z^{-nu}`.
///
/// `s_{kappa nu}` are the coefficients of the modified clock in the clock basis
/// of `H_A`, `Z~^nu = sum_kappa s_{kappa nu} Z^kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct HwDecomposition {
    pub s: CMatrix,
    pub lambda: FourierMatrix,
}

impl HwDecomposition {
    /// `(1/(d_A d_B)) sum s_{kappa nu} lambda_{mu nu} X^mu Z^kappa (x) X^mu Z^{-nu}`.
    ///
    /// Equals [`hw_operator_sum`] for all dimensions, and the Bell diagonal
    /// state itself only when `d_A = d_B`.
    pub fn reconstruct(&self) -> CMatrix {
        let dims = self.lambda.dims();
        let (da, db) = (dims.d_a(), dims.d_b());
        let n = dims.total();
        let mut out = CMatrix::zeros(n, n);
        for mu in 0..da {
            for nu in 0..db {
                let l = self.lambda.matrix()[(mu, nu)];
                if l.norm() == 0.0 {
                    continue;
                }
                let b = hw_operator(db, mu as i64, -(nu as i64)).expect("valid dimension");
                for kappa in 0..da {
                    let c = self.s[(kappa, nu)] * l;
                    if c.norm() < 1e-15 {
                        continue;
                    }
                    let a = hw_operator(da, mu as i64, kappa as i64).expect("valid dimension");
                    out += kron(&a, &b) * c;
                }
            }
        }
        out / C64::new(n as f64, 0.0)
    }
}

/// `s_{kappa nu} = (1/d_A) sum_j (w_A^{-kappa} w_B^{nu})^j`.
pub fn clock_expansion_coefficients(dims: BipartiteDims) -> CMatrix {
    let (da, db) = (dims.d_a(), dims.d_b());
    CMatrix::from_fn(da, db, |kappa, nu| {
        let mut acc = ZERO;
        for j in 0..da {
            acc += root_of_unity(da, -((kappa * j) as i64)) * root_of_unity(db, (nu * j) as i64);
        }
        acc / C64::new(da as f64, 0.0)
    })
}

pub fn hw_full_decomposition(p: &ProbabilityMatrix) -> HwDecomposition {
    HwDecomposition { s: clock_expansion_coefficients(p.dims()), lambda: fourier_from_probabilities(p) }
}

/// `T(mu, nu) = X^mu Z~^nu (x) X^mu Z^{-nu}`.
pub fn t_operator(dims: BipartiteDims, mu: i64, nu: i64) -> CMatrix {
    let (da, db) = (dims.d_a(), dims.d_b());
    let x_a = hw_operator(da, mu, 0).expect("valid dimension");
    let zt = modified_clock(da, db, nu).expect("valid dimension");
    let b = hw_operator(db, mu, -nu).expect("valid dimension");
    kron(&(x_a * zt), &b)
}

/// `(1/(d_A d_B)) sum lambda_{mu nu} T(mu, nu)` with the operators `T` above.
pub fn hw_operator_sum(lambda: &FourierMatrix) -> CMatrix {
    let dims = lambda.dims();
    let n = dims.total();
    let mut out = CMatrix::zeros(n, n);
    for mu in 0..dims.d_a() {
        for nu in 0..dims.d_b() {
            let l = lambda.matrix()[(mu, nu)];
            if l.norm() != 0.0 {
                out += t_operator(dims, mu as i64, nu as i64) * l;
            }
        }
    }
    out / C64::new(n as f64, 0.0)
}

/// Unitary `K(mu, nu) = sum_{ab} w_A^{-a mu} w_B^{-b nu} |phi^{ab}><phi^{ab}|`.
///
/// It shifts the first index within each Bell sector,
/// `|i, i+b> -> w_B^{-b nu} |i+mu, i+mu+b>`, so `K(mu, nu)` is a product of a
/// sector-preserving shift and the local phase `Z~^nu (x) Z^{-nu}`. For
/// `d_A = d_B` it coincides with [`t_operator`].
pub fn bell_character(dims: BipartiteDims, mu: i64, nu: i64) -> CMatrix {
    let (da, db) = (dims.d_a(), dims.d_b());
    let n = dims.total();
    let shift = mu.rem_euclid(da as i64) as usize;
    let mut k = CMatrix::zeros(n, n);
    for i in 0..da {
        let i2 = (i + shift) % da;
        for b in 0..db {
            let col = dims.flat(i, (i + b) % db);
            let row = dims.flat(i2, (i2 + b) % db);
            k[(row, col)] = root_of_unity(db, -(b as i64) * nu);
        }
    }
    k
}

/// `rho = (1/(d_A d_B)) sum lambda_{mu nu} K(mu, nu)`, after checking that
/// `Lambda` describes a valid probability matrix.
pub fn bds_from_fourier(lambda: &FourierMatrix) -> Result<DensityMatrix> {
    probabilities_from_fourier(lambda)?;
    let dims = lambda.dims();
    let n = dims.total();
    let mut out = CMatrix::zeros(n, n);
    for mu in 0..dims.d_a() {
        for nu in 0..dims.d_b() {
            let l = lambda.matrix()[(mu, nu)];
            if l.norm() != 0.0 {
                out += bell_character(dims, mu as i64, nu as i64) * l;
            }
        }
    }
    let out = out / C64::new(n as f64, 0.0);
    let out = (&out + out.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_trusted(out, dims))
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("twirl strength {q} outside [0, 1]")))
    }
}

fn average_adjoint(rho: &DensityMatrix, q: f64, op: impl Fn(i64, i64) -> CMatrix) -> Result<DensityMatrix> {
    check_q(q)?;
    let dims = rho.dims();
    let n = dims.total();
    let mut avg = CMatrix::zeros(n, n);
    for mu in 0..dims.d_a() {
        for nu in 0..dims.d_b() {
            let t = op(mu as i64, nu as i64);
            avg += &t * rho.matrix() * t.adjoint();
        }
    }
    let out = rho.matrix().scale(1.0 - q) + avg.scale(q / n as f64);
    let out = (&out + out.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_trusted(out, dims))
}

/// `Phi_q(rho) = (1-q) rho + q/(d_A d_B) sum K rho K^dagger` over the Bell characters.
///
/// For `q = 1` this is the projection onto the Bell diagonal states,
/// `sum <phi^{ab}|rho|phi^{ab}> |phi^{ab}><phi^{ab}|`.
pub fn twirl_channel(rho: &DensityMatrix, q: f64) -> Result<DensityMatrix> {
    let dims = rho.dims();
    average_adjoint(rho, q, |mu, nu| bell_character(dims, mu, nu))
}

/// The same average over the local unitaries `T(mu, nu)`.
///
/// A mixture of local unitaries, hence non-entangling in every dimension. It
/// agrees with [`twirl_channel`] when `d_A = d_B`.
pub fn hw_twirl_channel(rho: &DensityMatrix, q: f64) -> Result<DensityMatrix> {
    let dims = rho.dims();
    average_adjoint(rho, q, |mu, nu| t_operator(dims, mu, nu))
}

/// `sum |lambda_{mu nu}|`, the CCNR value of a Bell diagonal state for `d_A = d_B`.
pub fn ccnr_value_equal_dims(lambda: &FourierMatrix) -> Result<f64> {
    if !lambda.dims().is_square() {
        return Err(Error::InvalidInput(format!(
            "the Fourier CCNR form needs equal dimensions, got {}; use criteria::ccnr",
            lambda.dims()
        )));
    }
    Ok(lambda.l1_norm())
}

/// Two-qubit Werner family: `q/3` on `phi^00, phi^01, phi^10` and `1-q` on `phi^11`.
pub fn werner(q: f64) -> Result<ProbabilityMatrix> {
    check_q(q)?;
    ProbabilityMatrix::from_rows(&[vec![q / 3.0, q / 3.0], vec![q / 3.0, 1.0 - q]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{max_abs_diff, partial_transpose, Subsystem, ONE};
    use crate::sample::{random_density, random_probability_matrix, random_product_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    fn projector_sum(d: BipartiteDims, f: impl Fn(usize, usize) -> C64) -> CMatrix {
        let mut m = CMatrix::zeros(d.total(), d.total());
        for a in 0..d.d_a() {
            for b in 0..d.d_b() {
                let v = bell_state(d, a, b).unwrap();
                m += &v * v.adjoint() * f(a, b);
            }
        }
        m
    }

    #[test]
    fn bell_state_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = bell_state(dims(2, 2), 0, 0).unwrap();
        assert!((v[0] - C64::new(s, 0.0)).norm() < 1e-15 && (v[3] - C64::new(s, 0.0)).norm() < 1e-15);
        let v = bell_state(dims(2, 3), 0, 0).unwrap();
        assert!((v[0].re - s).abs() < 1e-15 && (v[4].re - s).abs() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(bell_state(dims(2, 3), 2, 0).is_err());
        assert!(bell_state(dims(2, 3), 0, 3).is_err());
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for d in [dims(2, 3), dims(4, 6), dims(3, 3)] {
            let basis: Vec<CVector> = (0..d.d_a())
                .flat_map(|a| (0..d.d_b()).map(move |b| (a, b)))
                .map(|(a, b)| bell_state(d, a, b).unwrap())
                .collect();
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let g = u.dotc(v);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - C64::new(want, 0.0)).norm() < 1e-12, "{d} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn bell_state_is_local_rotation_of_phi00() {
        let d = dims(3, 5);
        let phi = bell_state(d, 0, 0).unwrap();
        for a in 0..3 {
            for b in 0..5 {
                let u = kron(&hw_operator(3, 0, a as i64).unwrap(), &hw_operator(5, b as i64, 0).unwrap());
                let v = bell_state(d, a, b).unwrap();
                assert!((u * &phi - v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_mixture_is_maximally_mixed() {
        for d in [dims(2, 3), dims(4, 6)] {
            let rho = bds_from_probabilities(&ProbabilityMatrix::uniform(d));
            assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(d).matrix()) < 1e-12);
        }
        let rho = bds_from_probabilities(&werner(0.75).unwrap());
        assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(dims(2, 2)).matrix()) < 1e-12);
    }

    #[test]
    fn pure_bell_state_from_probabilities() {
        let d = dims(2, 3);
        let p = ProbabilityMatrix::uniform_on(d, &[(0, 0)]).unwrap();
        let rho = bds_from_probabilities(&p);
        let v = bell_state(d, 0, 0).unwrap();
        assert!(max_abs_diff(rho.matrix(), &(&v * v.adjoint())) < 1e-15);
    }

    #[test]
    fn probability_matrix_validation() {
        assert!(ProbabilityMatrix::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(ProbabilityMatrix::from_rows(&[vec![1.1, -0.1]]).is_err());
        let p = ProbabilityMatrix::from_rows(&[vec![1.0 + 1e-13, -1e-13]]).unwrap();
        assert_eq!(p.get(0, 1), 0.0);
        assert!(ProbabilityMatrix::from_rows(&[vec![0.5, 0.5], vec![0.0]]).is_err());
        assert!(ProbabilityMatrix::uniform_on(dims(2, 2), &[(0, 0), (0, 0)]).is_err());
        assert!(ProbabilityMatrix::uniform_on(dims(2, 2), &[(2, 0)]).is_err());
    }

    #[test]
    fn fourier_examples() {
        let d = dims(2, 3);
        let l = fourier_from_probabilities(&ProbabilityMatrix::uniform_on(d, &[(0, 0)]).unwrap());
        assert!(l.matrix().iter().all(|z| (z - ONE).norm() < 1e-15));
        let l = fourier_from_probabilities(&ProbabilityMatrix::uniform(dims(3, 4)));
        for (mu, nu) in (0..3).flat_map(|m| (0..4).map(move |n| (m, n))) {
            let want = if (mu, nu) == (0, 0) { 1.0 } else { 0.0 };
            assert!((l.get(mu, nu) - C64::new(want, 0.0)).norm() < 1e-14);
        }
        let p = probabilities_from_fourier(&FourierMatrix::all_ones(d)).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-14 && p.matrix().sum() - 1.0 < 1e-14);
        let p = probabilities_from_fourier(&FourierMatrix::delta(d)).unwrap();
        assert!(p.matrix().iter().all(|x| (x - 1.0 / 6.0).abs() < 1e-14));
    }

    #[test]
    fn fourier_round_trip_and_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [dims(2, 2), dims(2, 3), dims(3, 3), dims(4, 6)] {
            for _ in 0..20 {
                let p = random_probability_matrix(&mut rng, d);
                let l = fourier_from_probabilities(&p);
                FourierMatrix::new(d, l.matrix().clone()).unwrap();
                let back = probabilities_from_fourier(&l).unwrap();
                assert!((back.matrix() - p.matrix()).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_matrix_validation() {
        let d = dims(2, 3);
        let mut l = FourierMatrix::delta(d).matrix().clone();
        l[(0, 0)] = C64::new(0.9, 0.0);
        assert!(FourierMatrix::new(d, l).is_err());
        let mut l = FourierMatrix::delta(d).matrix().clone();
        l[(0, 1)] = C64::new(0.0, 0.5);
        assert!(FourierMatrix::new(d, l.clone()).is_err());
        l[(0, 2)] = C64::new(0.0, -0.5);
        assert!(FourierMatrix::new(d, l).is_ok());
        let mut l = FourierMatrix::delta(d).matrix().clone();
        l[(1, 0)] = C64::new(1.5, 0.0);
        assert!(FourierMatrix::new(d, l).is_err());
    }

    #[test]
    fn invalid_fourier_is_rejected_by_inverse() {
        let d = dims(2, 2);
        let l = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, C64::new(-1.0, 0.0)]);
        let l = FourierMatrix::new(d, l).unwrap();
        assert!(matches!(probabilities_from_fourier(&l), Err(Error::NotAProbabilityDistribution(_))));
        assert!(bds_from_fourier(&l).is_err());
    }

    #[test]
    fn toeplitz_examples() {
        let d = dims(2, 3);
        let r = toeplitz_necessary_check(&FourierMatrix::delta(d), 6).unwrap();
        assert!(r.pass && r.first_failure.is_none());
        let mut l = FourierMatrix::delta(d).matrix().clone();
        l[(1, 0)] = C64::new(1.5, 0.0);
        let r = toeplitz_necessary_check(&FourierMatrix::new_unchecked(d, l), 6).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure.unwrap().r, 2);
        assert!(toeplitz_necessary_check(&FourierMatrix::delta(d), 1).is_err());
    }

    #[test]
    fn toeplitz_passes_for_valid_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [dims(2, 3), dims(3, 4)] {
            for _ in 0..5 {
                let l = fourier_from_probabilities(&random_probability_matrix(&mut rng, d));
                assert!(toeplitz_necessary_check(&l, default_toeplitz_depth(d)).unwrap().pass);
            }
        }
    }

    #[test]
    fn clock_coefficients_equal_dims_are_kronecker_delta() {
        for d in 2..6 {
            let s = clock_expansion_coefficients(dims(d, d));
            for k in 0..d {
                for n in 0..d {
                    let want = if k == n { 1.0 } else { 0.0 };
                    assert!((s[(k, n)] - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn clock_coefficients_four_by_six() {
        let s = clock_expansion_coefficients(dims(4, 6));
        for k in 0..4 {
            for n in 0..6 {
                let z = s[(k, n)];
                if (3 * k + 12 - 2 * n) % 12 == 0 {
                    assert!((z - ONE).norm() < 1e-12);
                } else if n % 3 == 0 {
                    assert!(z.norm() < 1e-12);
                } else {
                    assert!(z.norm() > 0.1 && z.norm() < 1.0);
                }
            }
        }
    }

    #[test]
    fn clock_coefficients_expand_modified_clock() {
        let d = dims(3, 5);
        let s = clock_expansion_coefficients(d);
        for nu in 0..5 {
            let mut m = CMatrix::zeros(3, 3);
            for k in 0..3 {
                m += hw_operator(3, 0, k).unwrap() * s[(k as usize, nu)];
            }
            assert!(max_abs_diff(&m, &modified_clock(3, 5, nu as i64).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn hw_decomposition_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [dims(2, 2), dims(3, 3), dims(2, 3), dims(4, 6)] {
            let p = random_probability_matrix(&mut rng, d);
            let hw = hw_full_decomposition(&p);
            let expanded = hw.reconstruct();
            assert!(max_abs_diff(&expanded, &hw_operator_sum(&hw.lambda)) < 1e-10);
            if d.is_square() {
                assert!(max_abs_diff(&expanded, bds_from_probabilities(&p).matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn bell_character_matches_projector_sum() {
        let d = dims(2, 3);
        for mu in 0..2 {
            for nu in 0..3 {
                let k = bell_character(d, mu, nu);
                let want =
                    projector_sum(d, |a, b| root_of_unity(2, -(a as i64) * mu) * root_of_unity(3, -(b as i64) * nu));
                assert!(max_abs_diff(&k, &want) < 1e-12);
            }
        }
    }

    #[test]
    fn character_and_t_operator_agree_for_equal_dims() {
        let d = dims(3, 3);
        for mu in 0..3 {
            for nu in 0..3 {
                assert!(max_abs_diff(&bell_character(d, mu, nu), &t_operator(d, mu, nu)) < 1e-12);
            }
        }
    }

    #[test]
    fn bds_from_fourier_examples() {
        let d = dims(2, 3);
        let rho = bds_from_fourier(&FourierMatrix::delta(d)).unwrap();
        assert!(max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(d).matrix()) < 1e-14);
        let d2 = dims(2, 2);
        let rho = bds_from_fourier(&FourierMatrix::all_ones(d2)).unwrap();
        let v = bell_state(d2, 0, 0).unwrap();
        assert!(max_abs_diff(rho.matrix(), &(&v * v.adjoint())) < 1e-12);
    }

    #[test]
    fn bds_from_fourier_matches_probability_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [dims(2, 3), dims(3, 3), dims(4, 6)] {
            for _ in 0..5 {
                let p = random_probability_matrix(&mut rng, d);
                let l = fourier_from_probabilities(&p);
                let a = bds_from_fourier(&l).unwrap();
                let b = bds_from_probabilities(&p);
                assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
                if d.is_square() {
                    assert!(max_abs_diff(&hw_operator_sum(&l), b.matrix()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn twirl_projects_onto_bell_diagonal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = dims(2, 3);
        let rho = random_density(&mut rng, d, 6);
        assert_eq!(twirl_channel(&rho, 0.0).unwrap(), rho);
        let once = twirl_channel(&rho, 1.0).unwrap();
        let twice = twirl_channel(&once, 1.0).unwrap();
        assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-12);
        let weights = bell_weights(&rho).unwrap();
        assert!(max_abs_diff(once.matrix(), bds_from_probabilities(&weights).matrix()) < 1e-12);
        let half = twirl_channel(&rho, 0.5).unwrap();
        assert!((half.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(half.min_eigenvalue().unwrap() > -1e-12);
        assert!(twirl_channel(&rho, 1.5).is_err());
    }

    #[test]
    fn hw_twirl_is_non_entangling() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [dims(2, 3), dims(3, 3)] {
            for _ in 0..10 {
                let sigma = random_product_state(&mut rng, d);
                let out = hw_twirl_channel(&sigma, 1.0).unwrap();
                let pt = partial_transpose(out.matrix(), d, Subsystem::B).unwrap();
                assert!(crate::qlinalg::min_eigenvalue_hermitian(&pt).unwrap() > -1e-10);
                if d.is_square() {
                    let bell = twirl_channel(&sigma, 1.0).unwrap();
                    assert!(max_abs_diff(bell.matrix(), out.matrix()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ccnr_equal_dims_examples() {
        assert!((ccnr_value_equal_dims(&FourierMatrix::delta(dims(3, 3))).unwrap() - 1.0).abs() < 1e-15);
        assert!((ccnr_value_equal_dims(&FourierMatrix::all_ones(dims(2, 2))).unwrap() - 4.0).abs() < 1e-15);
        let p = ProbabilityMatrix::uniform_on(dims(4, 4), &[(0, 0), (1, 1), (1, 2), (1, 3), (2, 2), (3, 2)]).unwrap();
        assert!((ccnr_value_equal_dims(&fourier_from_probabilities(&p)).unwrap() - 6.0).abs() < 1e-12);
        assert!(ccnr_value_equal_dims(&FourierMatrix::delta(dims(2, 3))).is_err());
    }

    #[test]
    fn werner_entries() {
        let w = werner(0.3).unwrap();
        assert!((w.get(0, 1) - 0.1).abs() < 1e-15 && (w.get(1, 1) - 0.7).abs() < 1e-15);
        assert!(werner(-0.1).is_err());
    }
}
