//! Shared domain types: points, feasible regions, schedules and the problem
//! abstraction.

mod problem;
mod region;
mod schedule;
mod vector;

pub use problem::{DescentHint, Problem, Subgradient};
pub use region::{FeasibleRegion, FEASIBILITY_RTOL};
pub use schedule::{
    nested_index_set, robust_ceil, SamplePermutation, SampleSchedule, SpectralBounds,
    StepSchedule,
};
pub use vector::Vector;
