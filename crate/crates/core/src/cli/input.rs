use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::bds::{
    bds_from_probabilities, bell_weights, fourier_from_probabilities, probabilities_from_fourier, werner,
    FourierMatrix, ProbabilityMatrix,
};
use crate::builtins::named_support;
use crate::criteria::{correlation_matrix, BdsCorrelationKernel, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::io::{read_state, StateInput};
use crate::qlinalg::BipartiteDims;
use crate::search::{dichotomous_state, SupportSet};
use crate::state::DensityMatrix;

/// Exactly one state source, optionally mixed with white noise.
#[derive(Debug, Clone, Args, Default)]
pub struct StateArgs {
    /// Named state: werner (with --q), bell (with --bell), eq21, eq27, eq28 or fig3a..fig3f.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Werner parameter q in [0, 1].
    #[arg(long)]
    pub q: Option<f64>,
    /// Pure Bell state |phi^{alpha beta}> (dimensions from --dims, default 2 2).
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    pub bell: Option<Vec<usize>>,
    /// Local dimensions for --bell and --fourier.
    #[arg(long, num_args = 2, value_names = ["D_A", "D_B"])]
    pub dims: Option<Vec<usize>>,
    /// Maximally mixed state of the given dimensions.
    #[arg(long, num_args = 2, value_names = ["D_A", "D_B"])]
    pub maximally_mixed: Option<Vec<usize>>,
    /// Fourier matrix: all-ones (|phi^00>) or delta (maximally mixed).
    #[arg(long, value_name = "all-ones|delta")]
    pub fourier: Option<String>,
    /// JSON file with a probability matrix (p), Fourier matrix (lambda),
    /// density matrix (rho) or support (points).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// White-noise fraction mixed into the state.
    #[arg(long)]
    pub eps: Option<f64>,
}

/// A resolved state with whatever Bell diagonal description is available.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub label: String,
    pub eps: f64,
    pub probabilities: Option<ProbabilityMatrix>,
    pub support: Option<SupportSet>,
    pub rho: DensityMatrix,
}

#[derive(Serialize)]
pub struct StateLabel {
    pub label: String,
    #[serde(rename = "d_A")]
    pub d_a: usize,
    #[serde(rename = "d_B")]
    pub d_b: usize,
    pub eps: f64,
}

fn pair(v: &[usize], what: &str) -> Result<BipartiteDims> {
    match v {
        [a, b] => BipartiteDims::new(*a, *b),
        _ => Err(Error::InvalidInput(format!("{what} needs two values"))),
    }
}

impl LoadedState {
    pub fn dims(&self) -> BipartiteDims {
        self.rho.dims()
    }

    pub fn fourier(&self) -> Option<FourierMatrix> {
        self.probabilities.as_ref().map(fourier_from_probabilities)
    }

    pub fn correlation(&self) -> CorrelationMatrix {
        match &self.probabilities {
            Some(p) => BdsCorrelationKernel::new(p.dims()).correlation(p),
            None => correlation_matrix(&self.rho),
        }
    }

    pub fn label(&self) -> StateLabel {
        let d = self.dims();
        StateLabel { label: self.label.clone(), d_a: d.d_a(), d_b: d.d_b(), eps: self.eps }
    }

    fn from_probabilities(label: String, p: ProbabilityMatrix, support: Option<SupportSet>) -> Self {
        let rho = bds_from_probabilities(&p);
        Self { label, eps: 0.0, probabilities: Some(p), support, rho }
    }

    fn from_input(label: String, input: StateInput) -> Result<Self> {
        Ok(match input {
            StateInput::Probabilities(p) => Self::from_probabilities(label, p, None),
            StateInput::Fourier(l) => Self::from_probabilities(label, probabilities_from_fourier(&l)?, None),
            StateInput::Support(s) => Self::from_probabilities(label, dichotomous_state(&s), Some(s)),
            StateInput::Density(rho) => {
                rho.check_positive()?;
                // Keep the Bell picture when the state is Bell diagonal.
                let p = bell_weights(&rho)?;
                let bds = bds_from_probabilities(&p);
                let probabilities = crate::qlinalg::max_abs_diff(bds.matrix(), rho.matrix()) < 1e-10;
                Self { label, eps: 0.0, probabilities: probabilities.then_some(p), support: None, rho }
            }
        })
    }

    fn with_noise(mut self, eps: f64) -> Result<Self> {
        if eps == 0.0 {
            return Ok(self);
        }
        self.rho = self.rho.with_white_noise(eps)?;
        if let Some(p) = &self.probabilities {
            let n = p.dims().total() as f64;
            let m = p.matrix().map(|v| (1.0 - eps) * v + eps / n);
            self.probabilities = Some(ProbabilityMatrix::new(p.dims(), m)?);
        }
        self.support = None;
        self.eps = eps;
        Ok(self)
    }
}

impl StateArgs {
    fn sources(&self) -> usize {
        [
            self.builtin.is_some(),
            // `--builtin bell` takes its indices from `--bell`.
            self.bell.is_some() && !self.builtin.as_deref().is_some_and(|b| b.eq_ignore_ascii_case("bell")),
            self.maximally_mixed.is_some(),
            self.fourier.is_some(),
            self.input.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    pub fn is_given(&self) -> bool {
        self.sources() > 0
    }

    pub fn load(&self) -> Result<LoadedState> {
        if self.sources() != 1 {
            return Err(Error::InvalidInput(
                "give exactly one of --builtin, --bell, --maximally-mixed, --fourier or --input".into(),
            ));
        }
        let dims = self.dims.as_deref().map(|d| pair(d, "--dims")).transpose()?;
        let state = if let Some(name) = &self.builtin {
            match name.to_ascii_lowercase().as_str() {
                "werner" => {
                    let q = self.q.ok_or_else(|| Error::InvalidInput("--builtin werner needs --q".into()))?;
                    LoadedState::from_probabilities(format!("werner q={q}"), werner(q)?, None)
                }
                "bell" => {
                    let ab = self.bell.clone().unwrap_or_else(|| vec![0, 0]);
                    bell_state_input(&ab, dims)?
                }
                other => {
                    let s = named_support(other)?;
                    LoadedState::from_probabilities(other.to_string(), dichotomous_state(&s), Some(s))
                }
            }
        } else if let Some(ab) = &self.bell {
            bell_state_input(ab, dims)?
        } else if let Some(d) = &self.maximally_mixed {
            let d = pair(d, "--maximally-mixed")?;
            LoadedState::from_probabilities(format!("maximally mixed {d}"), ProbabilityMatrix::uniform(d), None)
        } else if let Some(kind) = &self.fourier {
            let d = dims.ok_or_else(|| Error::InvalidInput("--fourier needs --dims".into()))?;
            let l = match kind.as_str() {
                "all-ones" => FourierMatrix::all_ones(d),
                "delta" => FourierMatrix::delta(d),
                other => return Err(Error::InvalidInput(format!("unknown Fourier matrix '{other}'"))),
            };
            LoadedState::from_probabilities(format!("fourier {kind} {d}"), probabilities_from_fourier(&l)?, None)
        } else {
            let path = self.input.as_ref().expect("one source");
            LoadedState::from_input(path.display().to_string(), read_state(path)?)?
        };
        state.with_noise(self.eps.unwrap_or(0.0))
    }
}

fn bell_state_input(ab: &[usize], dims: Option<BipartiteDims>) -> Result<LoadedState> {
    let d = dims.unwrap_or(BipartiteDims::square(2)?);
    let [a, b] = ab else {
        return Err(Error::InvalidInput("--bell needs ALPHA BETA".into()));
    };
    if *a >= d.d_a() || *b >= d.d_b() {
        return Err(Error::InvalidInput(format!("Bell index ({a},{b}) outside {d}")));
    }
    let mut p = DMatrix::zeros(d.d_a(), d.d_b());
    p[(*a, *b)] = 1.0;
    let p = ProbabilityMatrix::new(d, p)?;
    let s = SupportSet::new(d, vec![(*a, *b)])?;
    Ok(LoadedState::from_probabilities(format!("bell {a} {b} {d}"), p, Some(s)))
}
