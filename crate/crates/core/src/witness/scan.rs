use rayon::prelude::*;
use serde::Serialize;

use super::sparse::{check_ell, select_support, solve, AdmmState, SparseOptions};
use super::{noise_threshold, Axis, DETECTION_SLACK};
use crate::criteria::{ssc_bound, CorrelationMatrix};
use crate::error::Result;

/// Tolerance defining the argmax set of a scan.
pub const ARGMAX_TOL: f64 = 1e-4;

fn grid_points(xs: &Axis, ys: &Axis) -> Vec<(f64, f64)> {
    let (xv, yv) = (xs.values(), ys.values());
    xv.iter().flat_map(|&x| yv.iter().map(move |&y| (x, y))).collect()
}

/// Noise thresholds over an `(x, y)` grid, stored with `x` as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseScan {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub grid: Vec<(f64, f64)>,
    pub eps_max: Vec<f64>,
    /// Largest threshold on the grid.
    pub max: f64,
    /// Grid points within `ARGMAX_TOL` of the maximum; empty when nothing is detected.
    pub argmax_set: Vec<(f64, f64)>,
    /// Detected points with an undetected 4-neighbour.
    pub boundary: Vec<(f64, f64)>,
}

impl NoiseScan {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.eps_max[ix * self.y_axis.len() + iy]
    }

    /// True when the detected grid points form one 4-connected component.
    pub fn detected_region_connected(&self) -> bool {
        let (nx, ny) = (self.x_axis.len(), self.y_axis.len());
        let detected: Vec<bool> = self.eps_max.iter().map(|e| *e > 0.0).collect();
        let total = detected.iter().filter(|d| **d).count();
        let Some(start) = detected.iter().position(|d| *d) else {
            return true;
        };
        let mut seen = vec![false; detected.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(k) = stack.pop() {
            count += 1;
            let (ix, iy) = (k / ny, k % ny);
            let mut push = |jx: usize, jy: usize| {
                let j = jx * ny + jy;
                if detected[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy);
            }
            if ix + 1 < nx {
                push(ix + 1, iy);
            }
            if iy > 0 {
                push(ix, iy - 1);
            }
            if iy + 1 < ny {
                push(ix, iy + 1);
            }
        }
        count == total
    }
}

/// Noise threshold at every grid point, computed in parallel.
pub fn scan_noise_threshold(c: &CorrelationMatrix, x_axis: Axis, y_axis: Axis, tol: f64) -> Result<NoiseScan> {
    let grid = grid_points(&x_axis, &y_axis);
    let eps_max = grid.par_iter().map(|&(x, y)| noise_threshold(c, x, y, tol)).collect::<Result<Vec<f64>>>()?;
    let max = eps_max.iter().copied().fold(0.0_f64, f64::max);
    let argmax_set = if max > 0.0 {
        grid.iter().zip(&eps_max).filter(|(_, e)| **e >= max - ARGMAX_TOL).map(|(p, _)| *p).collect()
    } else {
        Vec::new()
    };
    let ny = y_axis.len();
    let nx = x_axis.len();
    let mut boundary = Vec::new();
    for ix in 0..nx {
        for iy in 0..ny {
            if eps_max[ix * ny + iy] <= 0.0 {
                continue;
            }
            let neighbours = [
                (ix.checked_sub(1), Some(iy)),
                ((ix + 1 < nx).then_some(ix + 1), Some(iy)),
                (Some(ix), iy.checked_sub(1)),
                (Some(ix), (iy + 1 < ny).then_some(iy + 1)),
            ];
            if neighbours.iter().any(|n| matches!(n, (Some(jx), Some(jy)) if eps_max[jx * ny + jy] <= 0.0)) {
                boundary.push(grid[ix * ny + iy]);
            }
        }
    }
    Ok(NoiseScan { x_axis, y_axis, grid, eps_max, max, argmax_set, boundary })
}

/// Smallest number of measurement terms that detects the state at each grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiltrationMap {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub ell_max: usize,
    pub grid: Vec<(f64, f64)>,
    /// `None` when no `l <= ell_max` detects.
    pub level: Vec<Option<usize>>,
    /// Grid points where the solver stopped without a certificate.
    pub uncertified: usize,
}

impl FiltrationMap {
    /// Number of grid points in the detection set for `l` terms.
    pub fn count_at_most(&self, ell: usize) -> usize {
        self.level.iter().filter(|l| matches!(l, Some(k) if *k <= ell)).count()
    }

    pub fn min_level(&self) -> Option<usize> {
        self.level.iter().flatten().copied().min()
    }
}

/// For each grid point, increases `l` from 1 and stops at the first detection.
/// Each solve is warm-started from the previous one.
pub fn measurement_filtration(
    c: &CorrelationMatrix,
    x_axis: Axis,
    y_axis: Axis,
    ell_max: usize,
    opts: &SparseOptions,
) -> Result<FiltrationMap> {
    check_ell(c.dims(), ell_max)?;
    let grid = grid_points(&x_axis, &y_axis);
    let results = grid
        .par_iter()
        .map(|&(x, y)| {
            let m = c.scaled(x, y);
            let r = ssc_bound(c.dims(), x, y);
            let order = select_support(&m, ell_max);
            let mut warm: Option<AdmmState> = None;
            let mut certified = true;
            for ell in 1..=ell_max {
                let res = solve(&m, r, &order[..ell], warm.take(), opts)?;
                if res.value < -DETECTION_SLACK {
                    return Ok((Some(ell), true));
                }
                certified = res.lower_bound >= -DETECTION_SLACK;
                warm = res.state;
            }
            Ok((None, certified))
        })
        .collect::<Result<Vec<(Option<usize>, bool)>>>()?;
    let uncertified = results.iter().filter(|(_, c)| !c).count();
    let level = results.into_iter().map(|(l, _)| l).collect();
    Ok(FiltrationMap { x_axis, y_axis, ell_max, grid, level, uncertified })
}

/// Detection sets for every `l = 1..=ell_max`, each solved independently from
/// a cold start; `sets[l - 1][k]` refers to grid point `k`.
pub fn measurement_filtration_sets(
    c: &CorrelationMatrix,
    x_axis: Axis,
    y_axis: Axis,
    ell_max: usize,
    opts: &SparseOptions,
) -> Result<Vec<Vec<bool>>> {
    check_ell(c.dims(), ell_max)?;
    let grid = grid_points(&x_axis, &y_axis);
    let per_point = grid
        .par_iter()
        .map(|&(x, y)| {
            let m = c.scaled(x, y);
            let r = ssc_bound(c.dims(), x, y);
            let order = select_support(&m, ell_max);
            (1..=ell_max)
                .map(|ell| Ok(solve(&m, r, &order[..ell], None, opts)?.value < -DETECTION_SLACK))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;
    Ok((0..ell_max).map(|l| per_point.iter().map(|p| p[l]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bds::{bds_from_probabilities, ProbabilityMatrix};
    use crate::criteria::correlation_matrix;
    use crate::qlinalg::BipartiteDims;
    use crate::state::DensityMatrix;

    #[test]
    fn single_point_scan_of_two_qubit_bell_state() {
        let d = BipartiteDims::square(2).unwrap();
        let rho = bds_from_probabilities(&ProbabilityMatrix::uniform_on(d, &[(0, 0)]).unwrap());
        let p = Axis::point(1.0).unwrap();
        let s = scan_noise_threshold(&correlation_matrix(&rho), p, p, 1e-6).unwrap();
        assert_eq!(s.eps_max.len(), 1);
        assert!((s.max - 2.0 / 3.0).abs() < 1e-5);
        assert_eq!(s.argmax_set, vec![(1.0, 1.0)]);
    }

    #[test]
    fn separable_scan_is_zero() {
        let d = BipartiteDims::new(2, 3).unwrap();
        let c = correlation_matrix(&DensityMatrix::maximally_mixed(d));
        let a = Axis::new(0.0, 2.0, 4).unwrap();
        let s = scan_noise_threshold(&c, a, a, 1e-4).unwrap();
        assert!(s.eps_max.iter().all(|e| *e == 0.0));
        assert!(s.argmax_set.is_empty() && s.boundary.is_empty());
        let f = measurement_filtration(&c, a, a, 3, &SparseOptions::default()).unwrap();
        assert!(f.level.iter().all(Option::is_none));
    }
}
