use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::robust_ceil;

/// Number of training rows for a split of `n` rows: `ceil(fraction * n)`.
pub fn train_size(n: usize, train_fraction: f64) -> Result<usize> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::usage(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = robust_ceil(train_fraction * n as f64) as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::usage(format!(
            "split of {n} rows at fraction {train_fraction} leaves an empty side"
        )));
    }
    Ok(n_train)
}

/// Seeded train/test partition. Rows keep their original relative order
/// within each side.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = dataset.n_rows();
    let n_train = train_size(n, train_fraction)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.select(train), dataset.select(test)))
}
