use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bds::{probabilities_from_fourier, FourierMatrix, ProbabilityMatrix};
use crate::error::{Error, Result};
use crate::qlinalg::{root_of_unity, BipartiteDims, CMatrix, C64, ZERO};

/// Fourier indices that may be nonzero for a state invariant under partial
/// transposition: the first row, and for even `d` the even columns of row `d/2`.
pub fn pt_invariant_support(d: usize) -> Result<Vec<(usize, usize)>> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("need d >= 2, got {d}")));
    }
    let mut s: Vec<_> = (0..d).map(|nu| (0, nu)).collect();
    if d.is_multiple_of(2) {
        s.extend((0..d).step_by(2).map(|nu| (d / 2, nu)));
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtInvariantResult {
    pub d: usize,
    pub best_value: f64,
    pub best_lambda: FourierMatrix,
    pub best_probabilities: ProbabilityMatrix,
    /// Final objective of every restart, in restart order.
    pub values: Vec<f64>,
}

type Pair = ((usize, usize), (usize, usize), bool);

/// Real parameters of the free Fourier entries. Each pair `(mu,nu), (-mu,-nu)`
/// contributes one real parameter when it is self-conjugate and a real and
/// imaginary part otherwise; `lambda_00 = 1` is fixed.
struct Family {
    dims: BipartiteDims,
    /// Representative index, its partner, and whether it is self-conjugate.
    pairs: Vec<Pair>,
    /// Probabilities at the origin, flattened row-major.
    p0: DVector<f64>,
    /// Derivative of the flattened probabilities with respect to the parameters.
    a: DMatrix<f64>,
}

impl Family {
    fn new(d: usize) -> Result<Self> {
        let dims = BipartiteDims::square(d)?;
        let neg = |(mu, nu): (usize, usize)| ((d - mu) % d, (d - nu) % d);
        let mut pairs = Vec::new();
        for idx in pt_invariant_support(d)? {
            if idx == (0, 0) || pairs.iter().any(|&(_, p, _)| p == idx) {
                continue;
            }
            pairs.push((idx, neg(idx), neg(idx) == idx));
        }
        let n = d * d;
        let params: usize = pairs.iter().map(|&(_, _, real)| if real { 1 } else { 2 }).sum();
        let mut a = DMatrix::zeros(n, params);
        // p_{ab} = (1/d^2) sum lambda_{mn} w^{-(a m + b n)}.
        let column = |lam: &[((usize, usize), C64)]| {
            DVector::from_fn(n, |k, _| {
                let (al, be) = (k / d, k % d);
                let s: C64 = lam.iter().map(|&((mu, nu), z)| z * root_of_unity(d, -((al * mu + be * nu) as i64))).sum();
                s.re / n as f64
            })
        };
        let mut j = 0;
        for &(rep, partner, real) in &pairs {
            let one = C64::new(1.0, 0.0);
            if real {
                a.set_column(j, &column(&[(rep, one)]));
                j += 1;
            } else {
                let i = C64::new(0.0, 1.0);
                a.set_column(j, &column(&[(rep, one), (partner, one)]));
                a.set_column(j + 1, &column(&[(rep, i), (partner, -i)]));
                j += 2;
            }
        }
        let p0 = DVector::from_element(n, 1.0 / n as f64);
        Ok(Self { dims, pairs, p0, a })
    }

    fn params(&self) -> usize {
        self.a.ncols()
    }

    fn probabilities(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.p0 + &self.a * theta
    }

    fn lambda(&self, theta: &DVector<f64>) -> CMatrix {
        let d = self.dims.d_a();
        let mut l = CMatrix::from_element(d, d, ZERO);
        l[(0, 0)] = C64::new(1.0, 0.0);
        let mut j = 0;
        for &((m, n), (pm, pn), real) in &self.pairs {
            if real {
                l[(m, n)] = C64::new(theta[j], 0.0);
                j += 1;
            } else {
                let z = C64::new(theta[j], theta[j + 1]);
                l[(m, n)] = z;
                l[(pm, pn)] = z.conj();
                j += 2;
            }
        }
        l
    }

    /// `sum |lambda|` and a (sub)gradient.
    fn objective(&self, theta: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut f = 1.0;
        let mut g = DVector::zeros(self.params());
        let mut j = 0;
        for &(_, _, real) in &self.pairs {
            if real {
                f += theta[j].abs();
                g[j] = if theta[j] >= 0.0 { 1.0 } else { -1.0 };
                j += 1;
            } else {
                let r = theta[j].hypot(theta[j + 1]);
                f += 2.0 * r;
                if r > 0.0 {
                    g[j] = 2.0 * theta[j] / r;
                    g[j + 1] = 2.0 * theta[j + 1] / r;
                } else {
                    g[j] = 2.0;
                }
                j += 2;
            }
        }
        (f, g)
    }

    /// Largest `t` keeping `p + t A dir` nonnegative.
    fn max_step(&self, p: &DVector<f64>, dir: &DVector<f64>) -> f64 {
        let rate = &self.a * dir;
        p.iter()
            .zip(rate.iter())
            .filter(|(_, r)| **r < -1e-15)
            .map(|(pi, r)| pi.max(0.0) / -r)
            .fold(f64::INFINITY, f64::min)
    }

    /// Uniformly random direction, scaled to a random fraction of the way to the boundary.
    fn random_point<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let dir = DVector::from_fn(self.params(), |_, _| rng.random::<f64>() - 0.5);
        let t = self.max_step(&self.p0, &dir);
        dir * (t * rng.random::<f64>())
    }

    /// Gradient projected so that no active constraint is violated.
    fn feasible_direction(&self, g: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        let active: Vec<usize> = (0..p.len()).filter(|&i| p[i] <= 1e-12).collect();
        let mut blocking: Vec<usize> = Vec::new();
        let mut dir = g.clone();
        loop {
            let worst = active
                .iter()
                .filter(|i| !blocking.contains(i))
                .map(|&i| (i, self.a.row(i).dot(&dir.transpose())))
                .filter(|(_, r)| *r < -1e-13)
                .min_by(|x, y| x.1.total_cmp(&y.1));
            let Some((i, _)) = worst else { return dir };
            blocking.push(i);
            let rows = DMatrix::from_fn(blocking.len(), self.params(), |r, c| self.a[(blocking[r], c)]);
            let gram = &rows * rows.transpose();
            let Ok(inv) = gram.clone().pseudo_inverse(1e-12) else { return DVector::zeros(self.params()) };
            dir = g - rows.transpose() * (inv * (&rows * g));
            if dir.norm() < 1e-12 {
                return dir;
            }
        }
    }

    /// Ascent that moves to the boundary along the projected gradient until
    /// no improving feasible direction remains.
    fn ascend(&self, mut theta: DVector<f64>, max_iter: usize) -> DVector<f64> {
        let (mut f, _) = self.objective(&theta);
        for _ in 0..max_iter {
            let p = self.probabilities(&theta);
            let (_, g) = self.objective(&theta);
            let dir = self.feasible_direction(&g, &p);
            if dir.norm() < 1e-10 {
                break;
            }
            let t = self.max_step(&p, &dir);
            if !t.is_finite() || t <= 0.0 {
                break;
            }
            let next = &theta + dir * t;
            let (fn_, _) = self.objective(&next);
            if fn_ <= f + 1e-13 {
                break;
            }
            theta = next;
            f = fn_;
        }
        theta
    }
}

/// Local maximization of `sum |lambda|` over partial-transpose invariant Bell
/// diagonal states, from `restarts` random feasible starting points. Each
/// restart uses its own random stream, so the result does not depend on
/// the thread count.
pub fn maximize_ccnr_pt_invariant(d: usize, restarts: usize, seed: u64) -> Result<PtInvariantResult> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("need d >= 2, got {d}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidInput("need at least one restart".into()));
    }
    let fam = Family::new(d)?;
    let runs: Vec<(f64, DVector<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let theta = fam.ascend(fam.random_point(&mut rng), 10_000);
            (fam.objective(&theta).0, theta)
        })
        .collect();
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (_, theta) = runs.into_iter().max_by(|x, y| x.0.total_cmp(&y.0)).expect("at least one restart");
    let best_lambda = FourierMatrix::new_unchecked(fam.dims, fam.lambda(&theta));
    let best_probabilities = probabilities_from_fourier(&best_lambda)?;
    Ok(PtInvariantResult { d, best_value: best_lambda.l1_norm(), best_lambda, best_probabilities, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bds::{bds_from_probabilities, fourier_from_probabilities};
    use crate::qlinalg::{max_abs_diff, partial_transpose, Subsystem};

    #[test]
    fn support_sizes() {
        assert_eq!(pt_invariant_support(3).unwrap(), vec![(0, 0), (0, 1), (0, 2)]);
        assert_eq!(pt_invariant_support(4).unwrap().len(), 6);
        assert_eq!(pt_invariant_support(6).unwrap().len(), 9);
        assert!(pt_invariant_support(1).is_err());
    }

    #[test]
    fn parametrization_matches_fourier_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [3, 4, 6] {
            let fam = Family::new(d).unwrap();
            for _ in 0..10 {
                let theta = fam.random_point(&mut rng);
                let p = fam.probabilities(&theta);
                assert!(p.iter().all(|x| *x >= -1e-15));
                let pm = ProbabilityMatrix::new(fam.dims, DMatrix::from_fn(d, d, |a, b| p[a * d + b])).unwrap();
                let l = fourier_from_probabilities(&pm);
                assert!(max_abs_diff(l.matrix(), &fam.lambda(&theta)) < 1e-12);
            }
        }
    }

    #[test]
    fn family_states_are_partial_transpose_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3, 4, 6] {
            let fam = Family::new(d).unwrap();
            for _ in 0..5 {
                let theta = fam.ascend(fam.random_point(&mut rng), 3);
                let lam = FourierMatrix::new_unchecked(fam.dims, fam.lambda(&theta));
                let rho = bds_from_probabilities(&probabilities_from_fourier(&lam).unwrap());
                let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::A).unwrap();
                assert!(max_abs_diff(&pt, rho.matrix()) < 1e-10, "d = {d}");
            }
        }
    }

    #[test]
    fn trivial_start_is_feasible() {
        let fam = Family::new(4).unwrap();
        let zero = DVector::zeros(fam.params());
        assert_eq!(fam.objective(&zero).0, 1.0);
        assert!(fam.probabilities(&zero).iter().all(|p| *p > 0.0));
    }

    #[test]
    fn ascent_improves_and_is_deterministic() {
        let a = maximize_ccnr_pt_invariant(4, 8, 7).unwrap();
        let b = maximize_ccnr_pt_invariant(4, 8, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.best_value > 1.0);
        assert!(a.best_value <= 4.0 + 1e-6);
        assert!(a.best_probabilities.matrix().iter().all(|p| *p >= 0.0));
    }
}
