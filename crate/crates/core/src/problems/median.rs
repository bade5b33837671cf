//! One-dimensional `f(x) = (1/N) Σ |x - a_i|` on `[-R, R]`, with a closed-form
//! optimum. Used as a convergence oracle.

use crate::error::{Error, Result};
use crate::model::{DescentHint, FeasibleRegion, Problem, Subgradient, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct MedianL1 {
    anchors: Vec<f64>,
    radius: f64,
}

impl MedianL1 {
    pub fn new(anchors: Vec<f64>, radius: f64) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::usage("median problem needs at least one anchor"));
        }
        if anchors.iter().any(|a| !a.is_finite()) {
            return Err(Error::usage("anchors must be finite"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::usage(format!("radius must be finite and > 0, got {radius}")));
        }
        Ok(MedianL1 { anchors, radius })
    }

    /// `count` equally spaced anchors covering `[lo, hi]`.
    pub fn equally_spaced(count: usize, lo: f64, hi: f64, radius: f64) -> Result<Self> {
        let anchors = match count {
            0 => vec![],
            1 => vec![lo],
            _ => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        };
        Self::new(anchors, radius)
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn region(&self) -> FeasibleRegion {
        FeasibleRegion::symmetric_box(1, self.radius).expect("radius validated at construction")
    }

    fn check(&self, x: &Vector, idx: &[usize]) -> Result<()> {
        x.check_dim(1)?;
        if idx.is_empty() {
            return Err(Error::usage("index set is empty"));
        }
        if let Some(i) = idx.iter().find(|&&i| i >= self.anchors.len()) {
            return Err(Error::usage(format!("index {i} outside ground set")));
        }
        Ok(())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.anchors.iter().map(|a| (x - a).abs()).sum::<f64>() / self.anchors.len() as f64
    }

    /// A minimiser over `[-R, R]`: the (lower) median clipped to the interval.
    pub fn median_optimum(&self) -> f64 {
        let mut sorted = self.anchors.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[(sorted.len() - 1) / 2];
        median.clamp(-self.radius, self.radius)
    }

    /// Optimal value `f*`.
    pub fn median_value(&self) -> f64 {
        self.value_at(self.median_optimum())
    }
}

impl Problem for MedianL1 {
    fn dim(&self) -> usize {
        1
    }

    fn ground_size(&self) -> usize {
        self.anchors.len()
    }

    fn value(&self, x: &Vector, idx: &[usize]) -> Result<f64> {
        self.check(x, idx)?;
        let s: f64 = idx.iter().map(|&i| (x[0] - self.anchors[i]).abs()).sum();
        Ok(s / idx.len() as f64)
    }

    /// Mean of `sign(x - a_i)`, taking 0 at ties. The hint is ignored.
    fn subgradient(
        &self,
        x: &Vector,
        idx: &[usize],
        _hint: Option<DescentHint>,
    ) -> Result<Subgradient> {
        self.check(x, idx)?;
        let s: f64 = idx
            .iter()
            .map(|&i| {
                let d = x[0] - self.anchors[i];
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .sum();
        Ok(Subgradient {
            g: Vector::new(vec![s / idx.len() as f64])?,
            descent_certified: None,
        })
    }

    fn full_value(&self, x: &Vector) -> Result<f64> {
        x.check_dim(1)?;
        Ok(self.value_at(x[0]))
    }
}
