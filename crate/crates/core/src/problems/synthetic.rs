//! Seeded synthetic binary classification data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SparseRow};
use crate::error::{Error, Result};

/// Two Gaussian blobs centred at `±separation · u` for a random unit `u`,
/// with unit-variance isotropic noise. Points whose signed projection
/// `z u·w` falls below `margin` are redrawn, so the classes are separated by
/// a slab of width `2 margin` around the hyperplane `u·w = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    pub seed: u64,
}

fn default_separation() -> f64 {
    2.0
}

fn default_margin() -> f64 {
    0.5
}

impl BlobSpec {
    pub fn new(n_rows: usize, n_cols: usize, seed: u64) -> Self {
        BlobSpec {
            n_rows,
            n_cols,
            separation: default_separation(),
            margin: default_margin(),
            seed,
        }
    }
}

pub fn separable_blobs(spec: &BlobSpec) -> Result<Dataset> {
    if spec.n_rows == 0 || spec.n_cols == 0 {
        return Err(Error::usage("blob dataset needs at least one row and column"));
    }
    if !(spec.margin >= 0.0 && spec.separation > spec.margin) {
        return Err(Error::usage(format!(
            "blob separation {} must exceed margin {} >= 0",
            spec.separation, spec.margin
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut u: Vec<f64> = (0..spec.n_cols).map(|_| rng.sample(StandardNormal)).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);

    let mut rows = Vec::with_capacity(spec.n_rows);
    let mut labels = Vec::with_capacity(spec.n_rows);
    for _ in 0..spec.n_rows {
        let z: f64 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let w = loop {
            let w: Vec<f64> = u
                .iter()
                .map(|ui| z * spec.separation * ui + { let e: f64 = StandardNormal.sample(&mut rng); e })
                .collect();
            let proj: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
            if z * proj >= spec.margin {
                break w;
            }
        };
        rows.push(SparseRow::from_dense(&w)?);
        labels.push(if z > 0.0 { 1 } else { -1 });
    }
    Dataset::new(spec.n_cols, rows, labels)
}
