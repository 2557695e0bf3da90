//! Low-coherence sequence design under time-domain PAPR constraints.
//!
//! Sequences are unit-norm complex vectors of length `L` mapped onto `L` of
//! `N_C` OFDMA subcarriers. The crate provides:
//!
//! - [`model`]: subcarrier assignments, sequence sets, PAPR probe vectors and
//!   the metric layer (mutual coherence, discretized PAPR, Welch bound).
//! - [`solver`]: the hypersphere-collision designer that drives coherence down
//!   while keeping every sequence under a PAPR threshold.
//! - [`baselines`]: Zadoff-Chu families, random Gaussian sets and greedy
//!   subset selection used for comparison.
//! - [`io`]: the versioned text and JSON sequence-set file formats.

pub mod baselines;
pub mod error;
pub mod io;
pub mod model;
mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    coherence, evaluate, papr, welch_bound, Metrics, PaprProbeSet, SequenceSet,
    SubcarrierAssignment,
};
pub use solver::{
    Progress, RunReport, RunResult, Solver, SolverConfig, SolverState, Termination,
};

pub use num_complex::Complex64;
