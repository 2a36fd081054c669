//! Random matrices and states for property tests and Monte-Carlo checks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bds::ProbabilityMatrix;
use crate::qlinalg::{BipartiteDims, CMatrix, CVector, C64};
use crate::state::DensityMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random local density matrix of dimension `d` (Hilbert-Schmidt measure).
pub fn random_local_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

/// Random density matrix `G G^dagger / Tr` with `G` of size `n x rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dims.total(), rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    let m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::from_trusted(m, dims)
}

pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> DensityMatrix {
    let a = random_local_density(rng, dims.d_a());
    let b = random_local_density(rng, dims.d_b());
    DensityMatrix::product(&a, &b, dims).expect("shapes match by construction")
}

/// Mixture of `terms` random product states with Dirichlet-like weights.
pub fn random_separable_state<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims, terms: usize) -> DensityMatrix {
    let weights: Vec<f64> = (0..terms.max(1)).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<(f64, DensityMatrix)> =
        weights.iter().map(|w| (w / total, random_product_state(rng, dims))).collect();
    let mut m = CMatrix::zeros(dims.total(), dims.total());
    for (w, rho) in &parts {
        m += rho.matrix().scale(*w);
    }
    DensityMatrix::from_trusted(m, dims)
}

/// Uniform random point of the probability simplex of size `d_A x d_B`.
pub fn random_probability_matrix<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> ProbabilityMatrix {
    let raw: Vec<f64> = (0..dims.total()).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let rows: Vec<Vec<f64>> = raw.chunks(dims.d_b()).map(|r| r.iter().map(|x| x / total).collect()).collect();
    ProbabilityMatrix::from_rows(&rows).expect("valid by construction")
}
