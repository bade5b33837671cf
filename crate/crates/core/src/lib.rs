pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod model;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
