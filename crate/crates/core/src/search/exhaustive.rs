use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{phase_condition_check, SupportSet};
use crate::bds::{bds_from_probabilities, ProbabilityMatrix};
use crate::criteria::{ppt_check, BdsCorrelationKernel};
use crate::error::{Error, Result};
use crate::qlinalg::{trace_norm, BipartiteDims, TOL};

/// Largest number of candidate supports enumerated without an explicit budget.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Largest grid for which every support size is enumerated.
const MAX_ANY_CELLS: usize = 16;

/// Filters applied to each candidate support, cheapest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predicate {
    /// Displacement homogeneous, with the given link count if any.
    Homogeneous(Option<usize>),
    PhaseCondition,
    CcnrDetected,
    Ppt,
}

impl Predicate {
    fn cost(&self) -> u8 {
        match self {
            Predicate::Homogeneous(_) => 0,
            Predicate::PhaseCondition => 1,
            Predicate::CcnrDetected => 2,
            Predicate::Ppt => 3,
        }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "phase" | "phase_condition" => Ok(Predicate::PhaseCondition),
            "ppt" => Ok(Predicate::Ppt),
            "ccnr" | "ccnr_detected" => Ok(Predicate::CcnrDetected),
            "homogeneous" => Ok(Predicate::Homogeneous(None)),
            _ => match s.strip_prefix("homogeneous=").or_else(|| s.strip_prefix("homogeneous:")) {
                Some(k) => k
                    .parse()
                    .map(|k| Predicate::Homogeneous(Some(k)))
                    .map_err(|_| Error::InvalidInput(format!("bad link count in '{s}'"))),
                None => Err(Error::InvalidInput(format!(
                    "unknown predicate '{s}', expected phase, ppt, ccnr or homogeneous[=k]"
                ))),
            },
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Homogeneous(None) => write!(f, "homogeneous"),
            Predicate::Homogeneous(Some(k)) => write!(f, "homogeneous={k}"),
            Predicate::PhaseCondition => write!(f, "phase"),
            Predicate::CcnrDetected => write!(f, "ccnr"),
            Predicate::Ppt => write!(f, "ppt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeSpec {
    Exactly(usize),
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub dims: BipartiteDims,
    pub size: SizeSpec,
    pub predicates: Vec<Predicate>,
    pub budget: u128,
    /// Number of consecutive candidates per work unit.
    pub chunk: u64,
}

impl SearchConfig {
    pub fn new(dims: BipartiteDims, size: SizeSpec, predicates: Vec<Predicate>) -> Self {
        Self { dims, size, predicates, budget: DEFAULT_BUDGET, chunk: 1 << 15 }
    }

    fn sizes(&self) -> Vec<usize> {
        match self.size {
            SizeSpec::Exactly(k) => vec![k],
            SizeSpec::Any => (1..=self.dims.total()).collect(),
        }
    }

    fn predicate_names(&self) -> Vec<String> {
        self.predicates.iter().map(|p| p.to_string()).collect()
    }
}

/// One orbit representative with every criterion evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub support: SupportSet,
    pub mask: u64,
    /// Number of distinct cyclic translates.
    pub orbit_size: usize,
    pub homogeneity: Option<usize>,
    /// `None` for unequal local dimensions.
    pub phase_condition: Option<bool>,
    pub ccnr: f64,
    pub ccnr_detected: bool,
    pub ppt_min_eig: f64,
    pub ppt: bool,
}

/// Resumable progress of a search: completed work units and accepted masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub d_a: usize,
    pub d_b: usize,
    pub size: SizeSpec,
    pub predicates: Vec<String>,
    pub units_done: usize,
    pub units_total: usize,
    pub masks: Vec<u64>,
}

/// `n choose k`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = match r.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    r
}

/// Combination with colexicographic rank `rank` among `k`-subsets.
fn unrank(mut rank: u128, k: usize) -> u64 {
    let mut mask = 0u64;
    for i in (1..=k as u64).rev() {
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        rank -= binomial(c, i);
        mask |= 1 << c;
    }
    mask
}

/// Next integer with the same number of set bits.
fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x.wrapping_add(c);
    (((r ^ x) >> 2) / c) | r
}

/// Cyclic translations of the grid as cell permutations, indexed by `mu * d_B + nu`.
pub(super) struct Translations {
    perms: Vec<Vec<u8>>,
    neg: Vec<usize>,
}

impl Translations {
    pub(super) fn new(dims: BipartiteDims) -> Self {
        let (da, db) = (dims.d_a(), dims.d_b());
        let mut perms = Vec::with_capacity(da * db);
        let mut neg = Vec::with_capacity(da * db);
        for mu in 0..da {
            for nu in 0..db {
                let p = (0..da * db).map(|k| (((k / db + mu) % da) * db + (k % db + nu) % db) as u8).collect();
                perms.push(p);
                neg.push(((da - mu) % da) * db + (db - nu) % db);
            }
        }
        Self { perms, neg }
    }

    pub(super) fn apply(&self, t: usize, mut mask: u64) -> u64 {
        let p = &self.perms[t];
        let mut out = 0u64;
        while mask != 0 {
            let k = mask.trailing_zeros() as usize;
            out |= 1 << p[k];
            mask &= mask - 1;
        }
        out
    }

    fn is_canonical(&self, mask: u64) -> bool {
        (1..self.perms.len()).all(|t| self.apply(t, mask) >= mask)
    }

    fn orbit_size(&self, mask: u64) -> usize {
        let mut images: Vec<u64> = (0..self.perms.len()).map(|t| self.apply(t, mask)).collect();
        images.sort_unstable();
        images.dedup();
        images.len()
    }

    pub(super) fn len(&self) -> usize {
        self.perms.len()
    }

    /// Cells moved out of the support by displacement `t`.
    pub(super) fn links(&self, t: usize, mask: u64) -> usize {
        mask.count_ones() as usize - (mask & self.apply(self.neg[t], mask)).count_ones() as usize
    }

    /// Common link count over nonzero displacements, if homogeneous.
    pub(super) fn homogeneity(&self, mask: u64) -> Option<usize> {
        let k = self.links(1, mask);
        (2..self.perms.len()).all(|t| self.links(t, mask) == k).then_some(k)
    }
}

struct Evaluator<'a> {
    dims: BipartiteDims,
    kernel: &'a BdsCorrelationKernel,
    translations: &'a Translations,
}

impl Evaluator<'_> {
    fn support(&self, mask: u64) -> SupportSet {
        SupportSet::from_mask(self.dims, mask).expect("mask fits the grid")
    }

    fn ccnr(&self, s: &SupportSet) -> Result<f64> {
        let w = vec![1.0 / s.len() as f64; s.len()];
        trace_norm(&self.kernel.weighted(s.points(), &w))
    }

    fn ccnr_threshold(&self) -> f64 {
        (self.dims.total() as f64).sqrt()
    }

    fn ppt(&self, s: &SupportSet) -> Result<f64> {
        let p = ProbabilityMatrix::uniform_on(self.dims, s.points())?;
        Ok(ppt_check(&bds_from_probabilities(&p))?.min_eig)
    }

    fn accepts(&self, mask: u64, predicates: &[Predicate]) -> Result<bool> {
        let s = self.support(mask);
        for p in predicates {
            let ok = match p {
                Predicate::Homogeneous(k) => match (self.translations.homogeneity(mask), k) {
                    (Some(h), Some(k)) => h == *k,
                    (h, None) => h.is_some(),
                    (None, Some(_)) => false,
                },
                Predicate::PhaseCondition => phase_condition_check(&s)?.holds,
                Predicate::CcnrDetected => self.ccnr(&s)? > self.ccnr_threshold() + TOL,
                Predicate::Ppt => self.ppt(&s)? >= -TOL,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn hit(&self, mask: u64) -> Result<SearchHit> {
        let support = self.support(mask);
        let ccnr = self.ccnr(&support)?;
        let ppt_min_eig = self.ppt(&support)?;
        let phase_condition = if self.dims.is_square() { Some(phase_condition_check(&support)?.holds) } else { None };
        Ok(SearchHit {
            mask,
            orbit_size: self.translations.orbit_size(mask),
            homogeneity: self.translations.homogeneity(mask),
            phase_condition,
            ccnr,
            ccnr_detected: ccnr > self.ccnr_threshold() + TOL,
            ppt_min_eig,
            ppt: ppt_min_eig >= -TOL,
            support,
        })
    }
}

/// Range of `count` candidates of cardinality `size` starting at colex rank `start`.
#[derive(Debug, Clone, Copy)]
struct Unit {
    size: usize,
    start: u128,
    count: u64,
}

fn plan(cfg: &SearchConfig) -> Result<Vec<Unit>> {
    let n = cfg.dims.total();
    if n > 64 {
        return Err(Error::Unsupported(format!("grids above 64 cells are not enumerable, got {}", cfg.dims)));
    }
    if cfg.size == SizeSpec::Any && n > MAX_ANY_CELLS {
        return Err(Error::InvalidInput(format!(
            "enumerating every size needs at most {MAX_ANY_CELLS} cells, {} has {n}; fix the size",
            cfg.dims
        )));
    }
    let sizes = cfg.sizes();
    if let Some(&k) = sizes.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidInput(format!("support size {k} outside 1..={n}")));
    }
    let required = sizes.iter().fold(0u128, |acc, &k| acc.saturating_add(binomial(n as u64, k as u64)));
    if required > cfg.budget {
        return Err(Error::BudgetExceeded { required, budget: cfg.budget });
    }
    let chunk = cfg.chunk.max(1);
    let mut units = Vec::new();
    for &k in &sizes {
        let total = binomial(n as u64, k as u64);
        let mut start = 0u128;
        while start < total {
            let count = (total - start).min(chunk as u128) as u64;
            units.push(Unit { size: k, start, count });
            start += count as u128;
        }
    }
    Ok(units)
}

fn run_unit(ev: &Evaluator, unit: Unit, predicates: &[Predicate]) -> Result<Vec<u64>> {
    let mut mask = unrank(unit.start, unit.size);
    let mut out = Vec::new();
    for i in 0..unit.count {
        if ev.translations.is_canonical(mask) && ev.accepts(mask, predicates)? {
            out.push(mask);
        }
        if i + 1 < unit.count {
            mask = next_combination(mask);
        }
    }
    Ok(out)
}

fn load_checkpoint(path: &Path, cfg: &SearchConfig, units_total: usize) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let cp: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    let same = cp.d_a == cfg.dims.d_a()
        && cp.d_b == cfg.dims.d_b()
        && cp.size == cfg.size
        && cp.predicates == cfg.predicate_names()
        && cp.units_total == units_total;
    if !same {
        return Err(Error::InvalidInput(format!("checkpoint {} belongs to a different search", path.display())));
    }
    Ok(Some(cp))
}

fn save_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string(cp)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Enumerates supports, keeps the least mask of each orbit under cyclic row
/// and column shifts and returns those passing every predicate, sorted by
/// size and mask. With a checkpoint path the search resumes from and
/// periodically records its progress there. `progress` receives the number
/// of completed and total work units.
pub fn exhaustive_dichotomous_search(
    cfg: &SearchConfig,
    checkpoint: Option<&Path>,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<Vec<SearchHit>> {
    let units = plan(cfg)?;
    let mut predicates = cfg.predicates.clone();
    predicates.sort_by_key(Predicate::cost);
    predicates.dedup();
    if predicates.contains(&Predicate::PhaseCondition) && !cfg.dims.is_square() {
        return Err(Error::Unsupported(format!(
            "the phase condition is defined for equal local dimensions, got {}",
            cfg.dims
        )));
    }
    let kernel = BdsCorrelationKernel::new(cfg.dims);
    let translations = Translations::new(cfg.dims);
    let ev = Evaluator { dims: cfg.dims, kernel: &kernel, translations: &translations };

    let mut state = match checkpoint {
        Some(p) => load_checkpoint(p, cfg, units.len())?,
        None => None,
    }
    .unwrap_or(Checkpoint {
        d_a: cfg.dims.d_a(),
        d_b: cfg.dims.d_b(),
        size: cfg.size,
        predicates: cfg.predicate_names(),
        units_done: 0,
        units_total: units.len(),
        masks: Vec::new(),
    });

    let batch = 8 * rayon::current_num_threads().max(1);
    while state.units_done < units.len() {
        let end = (state.units_done + batch).min(units.len());
        let found = units[state.units_done..end]
            .par_iter()
            .map(|&u| run_unit(&ev, u, &predicates))
            .collect::<Result<Vec<Vec<u64>>>>()?;
        state.masks.extend(found.into_iter().flatten());
        state.units_done = end;
        if let Some(p) = checkpoint {
            save_checkpoint(p, &state)?;
        }
        if let Some(f) = progress {
            f(state.units_done, units.len());
        }
    }

    let mut masks = state.masks;
    masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
    masks.dedup();
    masks.par_iter().map(|&m| ev.hit(m)).collect()
}

/// Least mask in the orbit of `s` under cyclic row and column shifts.
pub fn canonical_mask(s: &SupportSet) -> Option<u64> {
    let mask = s.mask()?;
    let t = Translations::new(s.dims());
    (0..t.perms.len()).map(|k| t.apply(k, mask)).min()
}
