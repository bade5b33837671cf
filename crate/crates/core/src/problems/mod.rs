//! Concrete finite-sum problems.

mod hinge;
mod median;
mod synthetic;

pub use hinge::{
    DescentSelection, HingeLossSvm, HingeParams, TermState, DEFAULT_KINK_TOL, DEFAULT_REG_COEFF,
};
pub use median::MedianL1;
pub use synthetic::{separable_blobs, BlobSpec};
