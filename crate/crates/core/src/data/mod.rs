//! Dataset ingestion and train/test splitting.

mod dataset;
mod libsvm;
mod split;

pub use dataset::{Dataset, LabelSymbols, SparseRow};
pub use libsvm::{load_libsvm, parse_libsvm, parse_libsvm_with, to_libsvm_string, write_libsvm};
pub use split::{split, train_size};
