use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse feature row. Indices are 1-based and strictly increasing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseRow {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::usage("sparse row index/value length mismatch"));
        }
        if indices.first() == Some(&0) {
            return Err(Error::usage("sparse row feature indices are 1-based"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("sparse row indices must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("sparse row values must be finite"));
        }
        Ok(SparseRow { indices, values })
    }

    /// Keeps the nonzero entries of a dense row.
    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32 + 1, *v))
            .unzip();
        Self::new(indices, values)
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn max_index(&self) -> u32 {
        self.indices.last().copied().unwrap_or(0)
    }

    /// Scalar product with a dense vector whose component `j` corresponds to
    /// feature index `j + 1`.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, v)| v * dense[j as usize - 1])
            .sum()
    }

    /// `dense += t * self`
    pub fn axpy_into(&self, t: f64, dense: &mut [f64]) {
        for (&j, v) in self.indices.iter().zip(&self.values) {
            dense[j as usize - 1] += t * v;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Original label text for the two classes. `None` for a class absent from
/// the source.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelSymbols {
    pub negative: Option<String>,
    pub positive: Option<String>,
}

/// Binary classification data: rows `w_i` with labels `z_i ∈ {-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_cols: usize,
    rows: Vec<SparseRow>,
    labels: Vec<i8>,
    symbols: LabelSymbols,
}

impl Dataset {
    pub fn new(n_cols: usize, rows: Vec<SparseRow>, labels: Vec<i8>) -> Result<Self> {
        let symbols = LabelSymbols {
            negative: labels.contains(&-1).then(|| "-1".to_string()),
            positive: labels.contains(&1).then(|| "+1".to_string()),
        };
        Self::with_symbols(n_cols, rows, labels, symbols)
    }

    pub(crate) fn with_symbols(
        n_cols: usize,
        rows: Vec<SparseRow>,
        labels: Vec<i8>,
        symbols: LabelSymbols,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::usage("dataset rows and labels differ in length"));
        }
        if let Some(l) = labels.iter().find(|l| **l != 1 && **l != -1) {
            return Err(Error::usage(format!("label {l} is not -1 or +1")));
        }
        if let Some(r) = rows.iter().find(|r| r.max_index() as usize > n_cols) {
            return Err(Error::usage(format!(
                "feature index {} exceeds n_cols = {n_cols}",
                r.max_index()
            )));
        }
        Ok(Dataset { n_cols, rows, labels, symbols })
    }

    /// Dense rows and real labels (sign taken, zero maps to -1).
    pub fn from_dense(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::usage("dense rows must share one length"));
        }
        let sparse = rows.iter().map(|r| SparseRow::from_dense(r)).collect::<Result<_>>()?;
        let labels = labels.iter().map(|&z| if z > 0.0 { 1 } else { -1 }).collect();
        Self::new(n_cols, sparse, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        f64::from(self.labels[i])
    }

    pub fn symbols(&self) -> &LabelSymbols {
        &self.symbols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseRow::nnz).sum()
    }

    pub fn max_row_norm(&self) -> f64 {
        self.rows.iter().map(SparseRow::norm_sq).fold(0.0, f64::max).sqrt()
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|l| **l == 1).count()
    }

    /// Rows at `idx`, in that order, sharing the column count and symbols.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            n_cols: self.n_cols,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            symbols: self.symbols.clone(),
        }
    }
}
