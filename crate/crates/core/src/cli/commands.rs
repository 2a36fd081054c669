use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::input::{LoadedState, StateArgs, StateLabel};
use super::{AnalyzeArgs, GlobalArgs, Outcome, ReproduceTarget, SearchCommand, Sink, WitnessCommand};
use crate::bds::{
    default_toeplitz_depth, toeplitz_necessary_check, werner, FourierMatrix, ProbabilityMatrix, ToeplitzReport,
};
use crate::builtins::named_support;
use crate::criteria::{
    ccnr_from_correlation, de_vicente_from_correlation, ppt_check, ssc_value, CorrelationMatrix, CriterionReport,
    PptReport, SscResult,
};
use crate::error::{Error, Result};
use crate::io::{fmt_num, probability_grid_rows};
use crate::qlinalg::BipartiteDims;
use crate::search::{
    anneal_homogeneous, ccnr_homogeneous, dichotomous_state, diophantine_solutions, displacement_homogeneity,
    exhaustive_dichotomous_search, fourier_l1, maximize_ccnr_pt_invariant, phase_condition_check, AnnealOptions,
    DiophantineSolution, Predicate, SearchConfig, SearchHit, SizeSpec, SupportSet, DEFAULT_BUDGET,
};
use crate::state::DensityMatrix;
use crate::witness::{
    measurement_filtration, measurement_filtration_sets, optimal_witness, scan_noise_threshold, sparse_witness, Axis,
    FiltrationMap, NoiseScan, SparseOptions, WitnessOperator, DEFAULT_NOISE_TOL,
};

pub(super) fn dispatch(g: &GlobalArgs, cmd: super::Command, sink: &mut Sink) -> Result<Outcome> {
    use super::Command::*;
    match cmd {
        State(s) => cmd_state(&s, sink),
        Analyze(a) => cmd_analyze(&a, sink),
        Witness(w) => cmd_witness(g, w, sink),
        Search(s) => cmd_search(g, s, sink),
        Reproduce { target } => cmd_reproduce(g, target, sink),
    }
}

#[derive(Serialize)]
struct StateReport {
    #[serde(flatten)]
    label: StateLabel,
    probabilities: Option<ProbabilityMatrix>,
    fourier: Option<FourierMatrix>,
    toeplitz: Option<ToeplitzReport>,
    support: Option<SupportSet>,
    rho: DensityMatrix,
}

fn cmd_state(args: &StateArgs, sink: &mut Sink) -> Result<Outcome> {
    let st = args.load()?;
    let fourier = st.fourier();
    let toeplitz =
        fourier.as_ref().map(|l| toeplitz_necessary_check(l, default_toeplitz_depth(l.dims()))).transpose()?;
    if let Some(p) = &st.probabilities {
        sink.csv("grid.csv", &["alpha", "beta", "p"], probability_grid_rows(p))?;
    }
    if let Some(l) = &fourier {
        sink.csv("fourier.csv", &["mu", "nu", "re", "im", "abs"], fourier_rows(l))?;
    }
    let report = StateReport {
        label: st.label(),
        probabilities: st.probabilities.clone(),
        fourier,
        toeplitz,
        support: st.support.clone(),
        rho: st.rho.clone(),
    };
    sink.json("state.json", &report)?;
    sink.summary(&report)?;
    Ok(Outcome::Completed)
}

fn fourier_rows(l: &FourierMatrix) -> Vec<Vec<String>> {
    let d = l.dims();
    let m = l.matrix();
    (0..d.d_a())
        .flat_map(|mu| {
            (0..d.d_b()).map(move |nu| {
                let z = m[(mu, nu)];
                vec![mu.to_string(), nu.to_string(), fmt_num(z.re), fmt_num(z.im), fmt_num(z.norm())]
            })
        })
        .collect()
}

#[derive(Serialize, Clone, Copy)]
struct SscPoint {
    x: f64,
    y: f64,
    bound: f64,
    norm: f64,
    g: f64,
    /// `g / bound`.
    g_normalized: f64,
    detected: bool,
}

impl From<SscResult> for SscPoint {
    fn from(r: SscResult) -> Self {
        Self {
            x: r.x,
            y: r.y,
            bound: r.bound,
            norm: r.norm,
            g: r.g,
            g_normalized: r.relative(),
            detected: r.detected(),
        }
    }
}

#[derive(Serialize)]
struct SscSummary {
    count: usize,
    detected_points: usize,
    min_g: f64,
    min_g_at: (f64, f64),
    min_g_normalized: f64,
    min_g_normalized_at: (f64, f64),
    /// Listed when no grid is given.
    points: Option<Vec<SscPoint>>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    #[serde(flatten)]
    label: StateLabel,
    ppt: PptReport,
    ccnr: CriterionReport,
    de_vicente: CriterionReport,
    ssc: SscSummary,
    detected: bool,
}

fn ssc_points(c: &CorrelationMatrix, pts: &[(f64, f64)]) -> Result<Vec<SscPoint>> {
    pts.par_iter().map(|&(x, y)| ssc_value(c, x, y).map(SscPoint::from)).collect()
}

fn cmd_analyze(a: &AnalyzeArgs, sink: &mut Sink) -> Result<Outcome> {
    let st = a.state.load()?;
    let c = st.correlation();
    let (pts, listed) = match (a.grid, a.grid_y) {
        (Some(gx), gy) => {
            let gy = gy.unwrap_or(gx);
            let (xs, ys) = (gx.values(), gy.values());
            (xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect::<Vec<_>>(), false)
        }
        (None, Some(_)) => return Err(Error::InvalidInput("--grid-y needs --grid".into())),
        (None, None) if a.x.is_empty() && a.y.is_empty() => (vec![(0.0, 0.0), (1.0, 1.0)], true),
        (None, None) => {
            if a.x.len() != a.y.len() {
                return Err(Error::InvalidInput("--x and --y need the same number of values".into()));
            }
            (a.x.iter().copied().zip(a.y.iter().copied()).collect(), true)
        }
    };
    let points = ssc_points(&c, &pts)?;
    sink.csv(
        "ssc.csv",
        &["x", "y", "g", "g_normalized"],
        points.iter().map(|p| vec![fmt_num(p.x), fmt_num(p.y), fmt_num(p.g), fmt_num(p.g_normalized)]).collect(),
    )?;
    let argmin = |f: fn(&SscPoint) -> f64| {
        points.iter().min_by(|p, q| f(p).total_cmp(&f(q))).map(|p| (f(p), (p.x, p.y))).expect("nonempty grid")
    };
    let (min_g, min_g_at) = argmin(|p| p.g);
    let (min_g_normalized, min_g_normalized_at) = argmin(|p| p.g_normalized);
    let ssc = SscSummary {
        count: points.len(),
        detected_points: points.iter().filter(|p| p.detected).count(),
        min_g,
        min_g_at,
        min_g_normalized,
        min_g_normalized_at,
        points: listed.then(|| points.clone()),
    };
    let ppt = ppt_check(&st.rho)?;
    let ccnr = ccnr_from_correlation(&c)?;
    let de_vicente = de_vicente_from_correlation(&c)?;
    let detected = !ppt.is_ppt || ccnr.detected || de_vicente.detected || ssc.detected_points > 0;
    let report = AnalyzeReport { label: st.label(), ppt, ccnr, de_vicente, ssc, detected };
    sink.json("analyze.json", &report)?;
    sink.summary(&report)?;
    Ok(Outcome::from_detected(detected))
}

#[derive(Serialize)]
struct WitnessReport {
    #[serde(flatten)]
    label: StateLabel,
    x: f64,
    y: f64,
    value: f64,
    detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessOperator>,
}

#[derive(Serialize)]
struct ScanSummary {
    #[serde(flatten)]
    label: StateLabel,
    x_axis: Axis,
    y_axis: Axis,
    points: usize,
    max: f64,
    argmax_count: usize,
    argmax_contains_11: bool,
    argmax_contains_00: bool,
    eps_at_11: Option<f64>,
    eps_at_00: Option<f64>,
    detected_points: usize,
    boundary_points: usize,
    connected: bool,
}

fn eps_at(s: &NoiseScan, x: f64, y: f64) -> Option<f64> {
    s.grid
        .iter()
        .zip(&s.eps_max)
        .find(|((gx, gy), _)| (gx - x).abs() < 1e-12 && (gy - y).abs() < 1e-12)
        .map(|(_, e)| *e)
}

fn scan_summary(label: StateLabel, s: &NoiseScan) -> ScanSummary {
    let has = |x: f64, y: f64| s.argmax_set.iter().any(|(a, b)| (a - x).abs() < 1e-12 && (b - y).abs() < 1e-12);
    ScanSummary {
        label,
        x_axis: s.x_axis,
        y_axis: s.y_axis,
        points: s.grid.len(),
        max: s.max,
        argmax_count: s.argmax_set.len(),
        argmax_contains_11: has(1.0, 1.0),
        argmax_contains_00: has(0.0, 0.0),
        eps_at_11: eps_at(s, 1.0, 1.0),
        eps_at_00: eps_at(s, 0.0, 0.0),
        detected_points: s.eps_max.iter().filter(|e| **e > 0.0).count(),
        boundary_points: s.boundary.len(),
        connected: s.detected_region_connected(),
    }
}

fn scan_rows(s: &NoiseScan) -> Vec<Vec<String>> {
    s.grid.iter().zip(&s.eps_max).map(|(&(x, y), e)| vec![fmt_num(x), fmt_num(y), fmt_num(*e)]).collect()
}

#[derive(Serialize)]
struct FiltrationSummary {
    #[serde(flatten)]
    label: StateLabel,
    x_axis: Axis,
    y_axis: Axis,
    lmax: usize,
    points: usize,
    /// Number of grid points detected with at most `l` terms, for `l = 1..=lmax`.
    counts_at_most: Vec<usize>,
    min_level: Option<usize>,
    uncertified: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    nested: Option<bool>,
}

fn filtration_summary(label: StateLabel, f: &FiltrationMap) -> FiltrationSummary {
    FiltrationSummary {
        label,
        x_axis: f.x_axis,
        y_axis: f.y_axis,
        lmax: f.ell_max,
        points: f.grid.len(),
        counts_at_most: (1..=f.ell_max).map(|l| f.count_at_most(l)).collect(),
        min_level: f.min_level(),
        uncertified: f.uncertified,
        nested: None,
    }
}

fn filtration_rows(f: &FiltrationMap) -> Vec<Vec<String>> {
    f.grid
        .iter()
        .zip(&f.level)
        .map(|(&(x, y), l)| vec![fmt_num(x), fmt_num(y), l.map_or(0, |l| l).to_string()])
        .collect()
}

fn cmd_witness(g: &GlobalArgs, w: WitnessCommand, sink: &mut Sink) -> Result<Outcome> {
    match w {
        WitnessCommand::Optimal { state, point } => {
            let st = state.load()?;
            let (wit, value) = optimal_witness(&st.rho, point.x, point.y)?;
            let detected = value < -crate::witness::DETECTION_SLACK;
            let mut report =
                WitnessReport { label: st.label(), x: point.x, y: point.y, value, detected, witness: Some(wit) };
            sink.json("witness.json", &report)?;
            report.witness = None;
            sink.summary(&report)?;
            Ok(Outcome::from_detected(detected))
        }
        WitnessCommand::Sparse { state, point, ell } => {
            let st = state.load()?;
            let o = sparse_witness(&st.correlation(), point.x, point.y, ell, &SparseOptions::default())?;
            #[derive(Serialize)]
            struct SparseReport<'a> {
                #[serde(flatten)]
                label: StateLabel,
                outcome: &'a crate::witness::SparseOutcome,
                certified: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                witness: Option<WitnessOperator>,
            }
            let mut report =
                SparseReport { label: st.label(), outcome: &o, certified: o.certified(), witness: o.witness()? };
            sink.json("sparse.json", &report)?;
            report.witness = None;
            sink.summary(&report)?;
            Ok(Outcome::from_detected(o.detected()))
        }
        WitnessCommand::Scan { state, grid } => {
            let st = state.load()?;
            let (xa, ya) = grid.axes();
            let s = scan_noise_threshold(&st.correlation(), xa, ya, g.tol.unwrap_or(DEFAULT_NOISE_TOL))?;
            sink.csv("scan.csv", &["x", "y", "eps_max"], scan_rows(&s))?;
            sink.json("scan.json", &s)?;
            sink.summary(&scan_summary(st.label(), &s))?;
            Ok(Outcome::from_detected(s.max > 0.0))
        }
        WitnessCommand::Filtration { state, grid, lmax, independent } => {
            let st = state.load()?;
            let (xa, ya) = grid.axes();
            let c = st.correlation();
            let opts = SparseOptions::default();
            let f = measurement_filtration(&c, xa, ya, lmax, &opts)?;
            let mut summary = filtration_summary(st.label(), &f);
            sink.csv("filtration.csv", &["x", "y", "level"], filtration_rows(&f))?;
            if independent {
                let sets = measurement_filtration_sets(&c, xa, ya, lmax, &opts)?;
                summary.nested = Some(sets.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| !a || *b)));
                summary.counts_at_most = sets.iter().map(|s| s.iter().filter(|b| **b).count()).collect();
                let mut header = vec!["x".to_string(), "y".to_string()];
                header.extend((1..=lmax).map(|l| format!("l{l}")));
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                let rows = f
                    .grid
                    .iter()
                    .enumerate()
                    .map(|(k, &(x, y))| {
                        let mut r = vec![fmt_num(x), fmt_num(y)];
                        r.extend(sets.iter().map(|s| u8::from(s[k]).to_string()));
                        r
                    })
                    .collect();
                sink.csv("filtration_sets.csv", &header, rows)?;
            }
            sink.json("filtration.json", &summary)?;
            sink.summary(&summary)?;
            Ok(Outcome::from_detected(f.min_level().is_some()))
        }
    }
}

fn parse_predicates(s: &str) -> Result<Vec<Predicate>> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect()
}

fn parse_size(s: &str) -> Result<SizeSpec> {
    if s.eq_ignore_ascii_case("any") {
        return Ok(SizeSpec::Any);
    }
    s.parse()
        .map(SizeSpec::Exactly)
        .map_err(|_| Error::InvalidInput(format!("size must be a number or 'any', got '{s}'")))
}

/// Prints coarse progress of long searches on stderr.
fn progress_printer(total_hint: usize) -> impl Fn(usize, usize) + Sync {
    let last = AtomicUsize::new(0);
    move |done, total| {
        if total_hint < 64 {
            return;
        }
        let tenth = done * 10 / total.max(1);
        if last.swap(tenth, Ordering::Relaxed) != tenth {
            eprintln!("search: {done}/{total} work units");
        }
    }
}

fn run_search(cfg: &SearchConfig, checkpoint: Option<&std::path::Path>) -> Result<Vec<SearchHit>> {
    let units = crate::search::binomial(cfg.dims.total() as u64, (cfg.dims.total() / 2) as u64) as usize;
    let p = progress_printer(units / cfg.chunk.max(1) as usize);
    exhaustive_dichotomous_search(cfg, checkpoint, Some(&p))
}

fn diophantine_rows(sols: &[DiophantineSolution]) -> Vec<Vec<String>> {
    sols.iter()
        .map(|s| vec![s.d.to_string(), s.cardinality.to_string(), s.k.to_string(), fmt_num(s.ccnr_excess)])
        .collect()
}

fn cmd_search(g: &GlobalArgs, s: SearchCommand, sink: &mut Sink) -> Result<Outcome> {
    match s {
        SearchCommand::Dichotomous { d, dims, size, pred, budget, checkpoint } => {
            let dims = match (d, dims.as_deref()) {
                (Some(d), None) => BipartiteDims::square(d)?,
                (None, Some([a, b])) => BipartiteDims::new(*a, *b)?,
                _ => return Err(Error::InvalidInput("give --d D or --dims D_A D_B".into())),
            };
            let mut cfg = SearchConfig::new(dims, parse_size(&size)?, parse_predicates(&pred)?);
            cfg.budget = budget.unwrap_or(DEFAULT_BUDGET);
            let hits = run_search(&cfg, checkpoint.as_deref())?;
            for h in &hits {
                sink.line(h)?;
            }
            sink.json_lines("hits.jsonl", &hits)?;
            eprintln!("search: {} orbit(s)", hits.len());
            Ok(Outcome::Completed)
        }
        SearchCommand::Diophantine { dmin, dmax } => {
            let sols = diophantine_solutions(dmin, dmax)?;
            for s in &sols {
                sink.line(s)?;
            }
            sink.csv("diophantine.csv", &["d", "size", "k", "ccnr_excess"], diophantine_rows(&sols))?;
            Ok(Outcome::Completed)
        }
        SearchCommand::PtInvariant { d, restarts } => {
            let r = maximize_ccnr_pt_invariant(d, restarts, g.seed)?;
            #[derive(Serialize)]
            struct PtReport<'a> {
                seed: u64,
                restarts: usize,
                exceeds_d: bool,
                #[serde(flatten)]
                result: &'a crate::search::PtInvariantResult,
            }
            let report = PtReport { seed: g.seed, restarts, exceeds_d: r.best_value > d as f64 + 1e-6, result: &r };
            sink.json("pt_invariant.json", &report)?;
            sink.summary(&report)?;
            Ok(Outcome::Completed)
        }
        SearchCommand::Homogeneous { d, size, k, restarts, iterations } => {
            let dims = BipartiteDims::square(d)?;
            let opts = AnnealOptions { seed: g.seed, restarts, iterations, ..AnnealOptions::default() };
            let found = anneal_homogeneous(dims, size, k, &opts)?;
            let report = found.as_ref().map(support_report).transpose()?;
            #[derive(Serialize)]
            struct HomogeneousReport {
                found: bool,
                seed: u64,
                #[serde(flatten)]
                report: Option<SupportReport>,
            }
            let out = HomogeneousReport { found: report.is_some(), seed: g.seed, report };
            sink.json("homogeneous.json", &out)?;
            sink.summary(&out)?;
            Ok(Outcome::Completed)
        }
    }
}

#[derive(Serialize)]
struct SupportReport {
    name: Option<String>,
    support: SupportSet,
    size: usize,
    phase_condition: Option<bool>,
    homogeneity: Option<usize>,
    /// Closed form for homogeneous supports of equal dimensions.
    ccnr_formula: Option<f64>,
    ccnr: f64,
    ccnr_threshold: f64,
    ccnr_detected: bool,
    ppt_min_eig: f64,
    ppt: bool,
}

fn support_report(s: &SupportSet) -> Result<SupportReport> {
    let dims = s.dims();
    let st = LoadedState {
        label: String::new(),
        eps: 0.0,
        probabilities: Some(dichotomous_state(s)),
        support: None,
        rho: crate::bds::bds_from_probabilities(&dichotomous_state(s)),
    };
    let ccnr = ccnr_from_correlation(&st.correlation())?;
    let ppt = ppt_check(&st.rho)?;
    let homogeneity = displacement_homogeneity(s);
    let square = dims.is_square();
    let ccnr_formula = match (square, homogeneity) {
        (true, Some(k)) => Some(ccnr_homogeneous(dims.d_a(), s.len(), k)?),
        _ => None,
    };
    if square {
        debug_assert!((ccnr.value - fourier_l1(s)).abs() < 1e-8);
    }
    Ok(SupportReport {
        name: None,
        support: s.clone(),
        size: s.len(),
        phase_condition: if square { Some(phase_condition_check(s)?.holds) } else { None },
        homogeneity,
        ccnr_formula,
        ccnr: ccnr.value,
        ccnr_threshold: ccnr.threshold,
        ccnr_detected: ccnr.detected,
        ppt_min_eig: ppt.min_eig,
        ppt: ppt.is_ppt,
    })
}

fn support_grid_rows(s: &SupportSet) -> Vec<Vec<String>> {
    let d = s.dims();
    (0..d.d_a())
        .flat_map(|a| (0..d.d_b()).map(move |b| (a, b)))
        .map(|(a, b)| vec![a.to_string(), b.to_string(), u8::from(s.contains(a, b)).to_string()])
        .collect()
}

fn named_state(name: &str) -> Result<LoadedState> {
    StateArgs { builtin: Some(name.into()), ..StateArgs::default() }.load()
}

fn cmd_reproduce(g: &GlobalArgs, target: ReproduceTarget, sink: &mut Sink) -> Result<Outcome> {
    match target {
        ReproduceTarget::Fig1 => {
            #[derive(Serialize)]
            struct Panel {
                panel: &'static str,
                q: f64,
                p: Vec<Vec<f64>>,
            }
            let mut panels = Vec::new();
            for (panel, q) in [("a", 0.0), ("b", 1.0 / 3.0), ("c", 2.0 / 3.0), ("d", 1.0)] {
                let p = werner(q)?;
                sink.csv(&format!("fig1{panel}.csv"), &["alpha", "beta", "p"], probability_grid_rows(&p))?;
                panels.push(Panel { panel, q, p: p.rows() });
            }
            sink.json("fig1.json", &panels)?;
            sink.summary(&panels)?;
        }
        ReproduceTarget::Fig2 => {
            let st = named_state("eq27")?;
            let ax = Axis::default_xy();
            let s = scan_noise_threshold(&st.correlation(), ax, ax, g.tol.unwrap_or(DEFAULT_NOISE_TOL))?;
            sink.csv("fig2.csv", &["x", "y", "eps_max"], scan_rows(&s))?;
            sink.json("fig2.json", &s)?;
            sink.summary(&scan_summary(st.label(), &s))?;
        }
        ReproduceTarget::Fig3 => {
            let mut panels = Vec::new();
            for name in ["fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f"] {
                let s = named_support(name)?;
                sink.csv(&format!("{name}.csv"), &["alpha", "beta", "member"], support_grid_rows(&s))?;
                let mut r = support_report(&s)?;
                r.name = Some(name.into());
                panels.push(r);
            }
            #[derive(Serialize)]
            struct SearchLine {
                search: String,
                orbit: SearchHit,
            }
            #[derive(Serialize)]
            struct SearchCount {
                search: String,
                orbits: usize,
            }
            let searches = [
                (BipartiteDims::square(3)?, SizeSpec::Any, vec![Predicate::Ppt, Predicate::CcnrDetected]),
                (
                    BipartiteDims::square(4)?,
                    SizeSpec::Exactly(6),
                    vec![Predicate::PhaseCondition, Predicate::CcnrDetected],
                ),
                (BipartiteDims::new(4, 6)?, SizeSpec::Exactly(10), vec![Predicate::Ppt, Predicate::CcnrDetected]),
            ];
            let mut lines = Vec::new();
            let mut counts = Vec::new();
            for (dims, size, preds) in searches {
                let label = format!(
                    "{dims} size={} pred={}",
                    match size {
                        SizeSpec::Any => "any".to_string(),
                        SizeSpec::Exactly(k) => k.to_string(),
                    },
                    preds.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
                );
                let hits = run_search(&SearchConfig::new(dims, size, preds), None)?;
                counts.push(SearchCount { search: label.clone(), orbits: hits.len() });
                lines.extend(hits.into_iter().map(|orbit| SearchLine { search: label.clone(), orbit }));
            }
            sink.json_lines("fig3_search.jsonl", &lines)?;
            #[derive(Serialize)]
            struct Fig3 {
                panels: Vec<SupportReport>,
                searches: Vec<SearchCount>,
            }
            let out = Fig3 { panels, searches: counts };
            sink.json("fig3.json", &out)?;
            sink.summary(&out)?;
        }
        ReproduceTarget::Fig4 => {
            let st = StateArgs { bell: Some(vec![0, 0]), dims: Some(vec![2, 3]), ..StateArgs::default() }.load()?;
            let ax = Axis::default_xy();
            let f = measurement_filtration(&st.correlation(), ax, ax, 6, &SparseOptions::default())?;
            sink.csv("fig4.csv", &["x", "y", "level"], filtration_rows(&f))?;
            let summary = filtration_summary(st.label(), &f);
            sink.json("fig4.json", &summary)?;
            sink.summary(&summary)?;
        }
        ReproduceTarget::Table1 => {
            let sols = diophantine_solutions(2, 12)?;
            sink.csv("table1.csv", &["d", "size", "k", "ccnr_excess"], diophantine_rows(&sols))?;
            sink.json("table1.json", &sols)?;
            sink.summary(&sols)?;
        }
    }
    Ok(Outcome::Completed)
}
