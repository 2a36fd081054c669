use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exhaustive::Translations;
use super::SupportSet;
use crate::error::{Error, Result};
use crate::qlinalg::BipartiteDims;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Proposed swaps per restart.
    pub iterations: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 64, iterations: 200_000, t_start: 4.0, t_end: 0.05 }
    }
}

fn energy(t: &Translations, mask: u64, k: usize) -> usize {
    (1..t.len()).map(|d| t.links(d, mask).abs_diff(k).pow(2)).sum()
}

/// Simulated annealing over supports of `size` cells for one in which every
/// nonzero displacement moves exactly `k` cells outside. Moves swap a cell
/// in the support with one outside; the energy is the squared deviation of
/// the link counts from `k`. Returns `None` when no restart reaches zero.
pub fn anneal_homogeneous(
    dims: BipartiteDims,
    size: usize,
    k: usize,
    opts: &AnnealOptions,
) -> Result<Option<SupportSet>> {
    let n = dims.total();
    if n > 64 {
        return Err(Error::Unsupported(format!("grids above 64 cells are not supported, got {dims}")));
    }
    if size == 0 || size >= n {
        return Err(Error::InvalidInput(format!("support size {size} outside 1..{n}")));
    }
    let t = Translations::new(dims);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cool = (opts.t_end / opts.t_start).powf(1.0 / opts.iterations.max(1) as f64);
    for _ in 0..opts.restarts {
        let mut cells: Vec<usize> = (0..n).collect();
        for i in 0..size {
            let j = rng.random_range(i..n);
            cells.swap(i, j);
        }
        let mut mask = cells[..size].iter().fold(0u64, |m, &c| m | 1 << c);
        let mut e = energy(&t, mask, k);
        let mut temp = opts.t_start;
        for _ in 0..opts.iterations {
            if e == 0 {
                return SupportSet::from_mask(dims, mask).map(Some);
            }
            let (i, o) = (rng.random_range(0..size), rng.random_range(size..n));
            let next = mask ^ (1 << cells[i]) ^ (1 << cells[o]);
            let en = energy(&t, next, k);
            if en <= e || rng.random::<f64>() < (-((en - e) as f64) / temp).exp() {
                cells.swap(i, o);
                mask = next;
                e = en;
            }
            temp *= cool;
        }
        if e == 0 {
            return SupportSet::from_mask(dims, mask).map(Some);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::displacement_homogeneity;

    #[test]
    fn finds_the_four_dimensional_solution() {
        let d = BipartiteDims::square(4).unwrap();
        let s = anneal_homogeneous(d, 6, 4, &AnnealOptions::default()).unwrap().unwrap();
        assert_eq!(displacement_homogeneity(&s), Some(4));
    }

    #[test]
    fn rejects_bad_sizes() {
        let d = BipartiteDims::square(3).unwrap();
        assert!(anneal_homogeneous(d, 0, 1, &AnnealOptions::default()).is_err());
        assert!(anneal_homogeneous(d, 9, 0, &AnnealOptions::default()).is_err());
    }
}
