//! Dichotomous Bell diagonal states: supports, the phase condition,
//! displacement homogeneity, the homogeneous CCNR formula and searches.

mod anneal;
mod exhaustive;
mod pt_invariant;

pub use anneal::{anneal_homogeneous, AnnealOptions};
pub use exhaustive::{
    binomial, canonical_mask, exhaustive_dichotomous_search, Checkpoint, Predicate, SearchConfig, SearchHit, SizeSpec,
    DEFAULT_BUDGET,
};
pub use pt_invariant::{maximize_ccnr_pt_invariant, pt_invariant_support, PtInvariantResult};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bds::{fourier_from_probabilities, ProbabilityMatrix};
use crate::error::{Error, Result};
use crate::qlinalg::{root_of_unity, BipartiteDims, C64, TOL, ZERO};

/// Nonempty set of Bell cells `(alpha, beta)`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SupportJson", into = "SupportJson")]
pub struct SupportSet {
    dims: BipartiteDims,
    points: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct SupportJson {
    #[serde(rename = "d_A")]
    d_a: usize,
    #[serde(rename = "d_B")]
    d_b: usize,
    points: Vec<[usize; 2]>,
}

impl TryFrom<SupportJson> for SupportSet {
    type Error = Error;

    fn try_from(j: SupportJson) -> Result<Self> {
        let dims = BipartiteDims::new(j.d_a, j.d_b)?;
        SupportSet::new(dims, j.points.iter().map(|p| (p[0], p[1])).collect())
    }
}

impl From<SupportSet> for SupportJson {
    fn from(s: SupportSet) -> Self {
        SupportJson { d_a: s.dims.d_a(), d_b: s.dims.d_b(), points: s.points.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl SupportSet {
    pub fn new(dims: BipartiteDims, points: Vec<(usize, usize)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &points {
            if a >= dims.d_a() || b >= dims.d_b() {
                return Err(Error::InvalidInput(format!("cell ({a},{b}) outside {dims}")));
            }
            if !seen.insert((a, b)) {
                return Err(Error::InvalidInput(format!("duplicate cell ({a},{b})")));
            }
        }
        Ok(Self { dims, points: seen.into_iter().collect() })
    }

    /// Support from a bit mask over flat cells `alpha * d_B + beta`.
    pub fn from_mask(dims: BipartiteDims, mask: u64) -> Result<Self> {
        if dims.total() > 64 || (dims.total() < 64 && mask >> dims.total() != 0) {
            return Err(Error::InvalidInput(format!("mask {mask:#x} does not fit {dims}")));
        }
        let db = dims.d_b();
        let points = (0..dims.total()).filter(|k| mask >> k & 1 == 1).map(|k| (k / db, k % db)).collect();
        Self::new(dims, points)
    }

    /// Every cell of the grid.
    pub fn full(dims: BipartiteDims) -> Self {
        let points = (0..dims.d_a()).flat_map(|a| (0..dims.d_b()).map(move |b| (a, b))).collect();
        Self { dims, points }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.points.binary_search(&(a, b)).is_ok()
    }

    /// Bit mask over flat cells, when the grid has at most 64 cells.
    pub fn mask(&self) -> Option<u64> {
        (self.dims.total() <= 64)
            .then(|| self.points.iter().fold(0u64, |m, &(a, b)| m | 1 << (a * self.dims.d_b() + b)))
    }

    /// Cells outside the support, or `None` for the full grid.
    pub fn complement(&self) -> Option<Self> {
        let points: Vec<_> =
            SupportSet::full(self.dims).points.into_iter().filter(|&(a, b)| !self.contains(a, b)).collect();
        (!points.is_empty()).then_some(Self { dims: self.dims, points })
    }

    /// Image under the cyclic shift `(a, b) -> (a + mu, b + nu)`.
    pub fn translated(&self, mu: usize, nu: usize) -> Self {
        let (da, db) = (self.dims.d_a(), self.dims.d_b());
        let mut points: Vec<_> = self.points.iter().map(|&(a, b)| ((a + mu) % da, (b + nu) % db)).collect();
        points.sort_unstable();
        Self { dims: self.dims, points }
    }
}

/// Probability `1/|S|` on every cell of `S`.
pub fn dichotomous_state(s: &SupportSet) -> ProbabilityMatrix {
    ProbabilityMatrix::uniform_on(s.dims, &s.points).expect("support cells are valid")
}

/// Outcome of the phase condition on every nonzero displacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub holds: bool,
    /// Displacements whose phase sum does not vanish, with that sum.
    #[serde(serialize_with = "serialize_failing")]
    pub failing: Vec<((usize, usize), C64)>,
}

fn serialize_failing<S: serde::Serializer>(
    failing: &[((usize, usize), C64)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<_> = failing.iter().map(|&(d, z)| (d, [z.re, z.im])).collect();
    v.serialize(s)
}

/// Sums `w^{(a,b) ^ (mu,nu)}` over cells of `S` moved outside `S` by each
/// displacement, with the symplectic form `(a,b) ^ (mu,nu) = a nu - b mu`.
pub fn phase_condition_check(s: &SupportSet) -> Result<PhaseReport> {
    let dims = s.dims;
    if !dims.is_square() {
        return Err(Error::Unsupported(format!(
            "the phase condition is defined for equal local dimensions, got {dims}"
        )));
    }
    let d = dims.d_a();
    let mut failing = Vec::new();
    for mu in 0..d {
        for nu in 0..d {
            if (mu, nu) == (0, 0) {
                continue;
            }
            let mut sum = ZERO;
            for &(a, b) in &s.points {
                if !s.contains((a + mu) % d, (b + nu) % d) {
                    sum += root_of_unity(d, (a * nu) as i64 - (b * mu) as i64);
                }
            }
            if sum.norm() >= TOL {
                failing.push(((mu, nu), sum));
            }
        }
    }
    Ok(PhaseReport { holds: failing.is_empty(), failing })
}

/// Number of cells of `S` moved outside `S` by each displacement, indexed by
/// `mu * d_B + nu`; entry 0 (the zero displacement) is always 0.
pub fn link_counts(s: &SupportSet) -> Vec<usize> {
    let (da, db) = (s.dims.d_a(), s.dims.d_b());
    let mut counts = vec![0; da * db];
    for mu in 0..da {
        for nu in 0..db {
            counts[mu * db + nu] = s.points.iter().filter(|&&(a, b)| !s.contains((a + mu) % da, (b + nu) % db)).count();
        }
    }
    counts
}

/// Common link count `k` when every nonzero displacement moves exactly `k`
/// cells of `S` outside `S`, `None` otherwise.
pub fn displacement_homogeneity(s: &SupportSet) -> Option<usize> {
    let counts = link_counts(s);
    let outside = s.dims.total() - s.len();
    // Every pair (inside, outside) is joined by exactly one displacement.
    assert_eq!(counts.iter().sum::<usize>(), s.len() * outside, "link counting identity");
    if let Some(c) = s.complement() {
        // A translation maps as many cells out of S as into it.
        assert_eq!(link_counts(&c), counts, "complement link counts");
    }
    let k = *counts.get(1)?;
    counts[1..].iter().all(|&c| c == k).then_some(k)
}

/// CCNR value `1 + (d^2 - 1) sqrt(k) / s` of a `k`-homogeneous dichotomous
/// state with `s` cells.
pub fn ccnr_homogeneous(d: usize, s: usize, k: usize) -> Result<f64> {
    if d < 2 || s == 0 || k > s || s > d * d {
        return Err(Error::InvalidInput(format!("need d >= 2 and 0 <= k <= s <= d^2, got d={d}, s={s}, k={k}")));
    }
    Ok(1.0 + (d * d - 1) as f64 * (k as f64).sqrt() / s as f64)
}

/// Integer solution of `(k - s) d^2 - k + s^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophantineSolution {
    pub d: usize,
    pub cardinality: usize,
    pub k: usize,
    /// CCNR value minus `d`.
    pub ccnr_excess: f64,
}

/// Nontrivial solutions for `d_min <= d <= d_max`, keeping the smaller of
/// each `(S, complement)` pair.
pub fn diophantine_solutions(d_min: usize, d_max: usize) -> Result<Vec<DiophantineSolution>> {
    if d_min < 2 || d_max < d_min {
        return Err(Error::InvalidInput(format!("need 2 <= d_min <= d_max, got {d_min}..{d_max}")));
    }
    let mut out = Vec::new();
    for d in d_min..=d_max {
        let n = (d * d) as i128;
        for s in 2..=(d * d / 2) {
            let si = s as i128;
            let num = si * (n - si);
            if num % (n - 1) != 0 {
                continue;
            }
            let k = num / (n - 1);
            assert_eq!((k - si) * n - k + si * si, 0);
            if k <= 0 {
                continue;
            }
            let k = k as usize;
            out.push(DiophantineSolution { d, cardinality: s, k, ccnr_excess: ccnr_homogeneous(d, s, k)? - d as f64 });
        }
    }
    Ok(out)
}

/// Sum of `|lambda|` of the dichotomous state, equal to its CCNR value for
/// equal local dimensions.
pub fn fourier_l1(s: &SupportSet) -> f64 {
    fourier_from_probabilities(&dichotomous_state(s)).l1_norm()
}
