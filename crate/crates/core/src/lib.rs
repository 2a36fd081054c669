//! Generalized Bell diagonal states on `d_A x d_B` systems, trace-norm
//! separability criteria over Heisenberg-Weyl operator bases, SSC entanglement
//! witnesses and combinatorial searches for bound entangled dichotomous states.

pub mod bds;
pub mod builtins;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod io;
pub mod qlinalg;
pub mod sample;
pub mod search;
pub mod state;
pub mod witness;

pub use error::{Error, Result};
pub use nalgebra;
pub use qlinalg::{BipartiteDims, CMatrix, CVector, Subsystem, C64};
pub use state::DensityMatrix;
