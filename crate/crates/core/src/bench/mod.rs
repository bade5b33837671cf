pub mod campaign;
pub mod cost;
pub mod metrics;

pub use campaign::*;
pub use cost::*;
pub use metrics::*;
