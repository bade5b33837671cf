//! Spectral projected subgradient solvers with predefined or line-search
//! step sizes.

pub mod config;
pub mod line_search;
mod spectral;
mod sps;
pub mod trace;

pub use config::{Method, SampleStrategy, SolverConfig, StepMode, YkPolicy};
pub use line_search::{
    armijo_accepts, ls_step_size, nonmonotone_reference, step_candidates, sufficient_decrease,
    LineSearchOutcome, TrialRecord, ValueHistory,
};
pub use spectral::spectral_update;
pub use sps::{initial_point, run, run_from, IterateState, StepContext, StepOutcome};
pub use trace::{RunTrace, StepDiagnostics, Termination, TraceRecord};
