//! Command-line front end. Every command prints a JSON summary on stdout and,
//! with `--out DIR`, writes its full JSON and CSV artifacts into `DIR`.
//!
//! Exit codes: 0 completed without a detection claim, 2 entanglement
//! detected, 1 usage or input error.

mod commands;
mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{to_json, write_csv};
use crate::witness::Axis;

pub use input::{LoadedState, StateArgs};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "BELLKIT_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "bellkit",
    version,
    about = "Bell diagonal states, separability criteria and SSC entanglement witnesses"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance of bisections (noise thresholds).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory receiving the full JSON/CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel scans and searches.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability matrix, Fourier matrix, Toeplitz check and density matrix of a state.
    State(StateArgs),
    /// PPT, CCNR, de Vicente and SSC criteria.
    Analyze(AnalyzeArgs),
    /// Witness construction, noise scans and measurement filtrations.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Dichotomous supports, the diophantine table and the PT-invariant family.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Plot-ready data for the figures and the table.
    Reproduce {
        #[arg(value_enum)]
        target: ReproduceTarget,
    },
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// x values of SSC points (paired with --y).
    #[arg(long, num_args = 1..)]
    pub x: Vec<f64>,
    /// y values of SSC points (paired with --x).
    #[arg(long, num_args = 1..)]
    pub y: Vec<f64>,
    /// Grid lo:hi:steps for both SSC parameters.
    #[arg(long)]
    pub grid: Option<Axis>,
    /// Separate grid for y.
    #[arg(long)]
    pub grid_y: Option<Axis>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub y: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Grid lo:hi:steps for x (and y unless --grid-y is given).
    #[arg(long, default_value = "0:2:200")]
    pub grid: Axis,
    #[arg(long)]
    pub grid_y: Option<Axis>,
}

impl GridArgs {
    fn axes(&self) -> (Axis, Axis) {
        (self.grid, self.grid_y.unwrap_or(self.grid))
    }
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// Optimal SSC witness at one (x, y).
    Optimal {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Witness restricted to l measurement terms.
    Sparse {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Number of measurement terms.
        #[arg(long = "l")]
        ell: usize,
    },
    /// Noise threshold over an (x, y) grid.
    Scan {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Smallest number of measurement terms detecting the state at each grid point.
    Filtration {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 6)]
        lmax: usize,
        /// Solve every l independently and check that the detection sets are nested.
        #[arg(long)]
        independent: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Exhaustive search over dichotomous supports, one orbit per output line.
    Dichotomous {
        /// Equal local dimension d.
        #[arg(long, conflicts_with = "dims")]
        d: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["D_A", "D_B"])]
        dims: Option<Vec<usize>>,
        /// Support size, or "any".
        #[arg(long, default_value = "any")]
        size: String,
        /// Comma-separated predicates: phase, ppt, ccnr, homogeneous[=k].
        #[arg(long, default_value = "")]
        pred: String,
        /// Largest number of candidates to enumerate.
        #[arg(long)]
        budget: Option<u128>,
        /// Resumable progress file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Nontrivial solutions of the homogeneity diophantine equation.
    Diophantine {
        #[arg(long, default_value_t = 2)]
        dmin: usize,
        #[arg(long, default_value_t = 12)]
        dmax: usize,
    },
    /// Local maximization of the CCNR value over partial-transpose invariant states.
    PtInvariant {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Randomized search for a displacement homogeneous support.
    Homogeneous {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 200_000)]
        iterations: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReproduceTarget {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Table1,
}

/// Whether a command ended with a detection claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Detected,
}

impl Outcome {
    pub fn from_detected(detected: bool) -> Self {
        if detected {
            Outcome::Detected
        } else {
            Outcome::Completed
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Completed => 0,
            Outcome::Detected => 2,
        }
    }
}

/// Destination of the summary and the artifacts.
pub struct Sink<'a> {
    dir: Option<PathBuf>,
    stdout: &'a mut dyn std::io::Write,
}

impl<'a> Sink<'a> {
    pub fn new(dir: Option<PathBuf>, stdout: &'a mut dyn std::io::Write) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir, stdout })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn summary<T: Serialize>(&mut self, value: &T) -> Result<()> {
        writeln!(self.stdout, "{}", to_json(value, true)?)?;
        Ok(())
    }

    pub fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        writeln!(self.stdout, "{}", to_json(value, false)?)?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), to_json(value, true)? + "\n")?;
        }
        Ok(())
    }

    pub fn json_lines<T: Serialize>(&self, name: &str, values: &[T]) -> Result<()> {
        if let Some(d) = &self.dir {
            let mut text = String::new();
            for v in values {
                text += &to_json(v, false)?;
                text.push('\n');
            }
            fs::write(d.join(name), text)?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        if let Some(d) = &self.dir {
            write_csv(fs::File::create(d.join(name))?, header, rows)?;
        }
        Ok(())
    }
}

fn configure_workers(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidInput("worker count must be positive".into()));
        }
        // A pool may already exist when called twice in one process; keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command, writing the summary to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<Outcome> {
    configure_workers(cli.global.workers)?;
    let mut sink = Sink::new(cli.global.out.clone(), stdout)?;
    commands::dispatch(&cli.global, cli.command, &mut sink)
}

/// Parses `args`, runs the command and maps the result to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    match run(cli, &mut out) {
        Ok(o) => ExitCode::from(o.exit_code()),
        // A closed pipe (`| head`) is not a failure of the command.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::from(0),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
