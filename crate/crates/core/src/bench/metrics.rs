//! Relative-error thresholds, winning probabilities and performance profiles.
//!
//! A [`HitTable`] holds, for each run and method, the FEV at which the method
//! first reached the error target (`None` if never).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(f - f*) / f*`
pub fn relative_error(f_val: f64, f_star: f64) -> Result<f64> {
    if f_star == 0.0 {
        return Err(Error::config(
            "relative error undefined for f* = 0; use absolute error mode or shift the objective",
        ));
    }
    Ok((f_val - f_star) / f_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    #[default]
    Relative,
    Absolute,
}

impl ErrorMode {
    pub fn error(&self, f_val: f64, f_star: f64) -> Result<f64> {
        match self {
            ErrorMode::Relative => relative_error(f_val, f_star),
            ErrorMode::Absolute => Ok(f_val - f_star),
        }
    }
}

/// Record-breaking points `(fev, error)` of a run: the error strictly
/// decreases along the curve. The first FEV at which the error drops to
/// `tau` or below is the first point with `error <= tau`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HitCurve(pub Vec<(u64, f64)>);

impl HitCurve {
    pub fn from_points(points: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut out: Vec<(u64, f64)> = Vec::new();
        for (fev, err) in points {
            if out.last().is_none_or(|&(_, best)| err < best) {
                out.push((fev, err));
            }
        }
        HitCurve(out)
    }

    pub fn first_hit(&self, tau: f64) -> Option<u64> {
        self.0.iter().find(|(_, e)| *e <= tau).map(|(fev, _)| *fev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitTable {
    pub methods: Vec<String>,
    /// `runs[l][m]`: first-hit FEV of method `m` in run `l`.
    pub runs: Vec<Vec<Option<u64>>>,
}

impl HitTable {
    pub fn new(methods: Vec<String>, runs: Vec<Vec<Option<u64>>>) -> Result<Self> {
        if runs.iter().any(|r| r.len() != methods.len()) {
            return Err(Error::usage("every run needs one entry per method"));
        }
        Ok(HitTable { methods, runs })
    }

    fn run_best(run: &[Option<u64>]) -> Option<u64> {
        run.iter().flatten().copied().min()
    }

    /// Fraction of runs in which each method hit with the least FEV. Ties
    /// share the point; runs where nobody hits give no points but still count
    /// in the denominator.
    pub fn winning_probability(&self) -> BTreeMap<String, f64> {
        self.profile_at(1.0)
    }

    /// Fraction of runs in which each method's first-hit FEV is within
    /// factor `q` of the run's best.
    pub fn profile_at(&self, q: f64) -> BTreeMap<String, f64> {
        let t = self.runs.len();
        let mut points = vec![0usize; self.methods.len()];
        for run in &self.runs {
            let Some(best) = Self::run_best(run) else { continue };
            for (m, hit) in run.iter().enumerate() {
                if let Some(fev) = hit {
                    if *fev as f64 <= q * best as f64 {
                        points[m] += 1;
                    }
                }
            }
        }
        self.methods
            .iter()
            .zip(points)
            .map(|(name, p)| (name.clone(), if t == 0 { 0.0 } else { p as f64 / t as f64 }))
            .collect()
    }

    pub fn performance_profile(&self, q_grid: &[f64]) -> Result<BTreeMap<String, Vec<f64>>> {
        if q_grid.iter().any(|q| !(*q >= 1.0)) {
            return Err(Error::usage("performance profile factors must be >= 1"));
        }
        if q_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::usage("performance profile grid must be sorted"));
        }
        let mut curves: BTreeMap<String, Vec<f64>> =
            self.methods.iter().map(|m| (m.clone(), Vec::with_capacity(q_grid.len()))).collect();
        for &q in q_grid {
            for (m, v) in self.profile_at(q) {
                curves.get_mut(&m).expect("same method set").push(v);
            }
        }
        Ok(curves)
    }

    /// Largest ratio of a hit to its run's best; the profile of every method
    /// that hits in every run is 1 at this factor.
    pub fn max_ratio(&self) -> f64 {
        self.runs
            .iter()
            .filter_map(|run| {
                let best = Self::run_best(run)?;
                run.iter()
                    .flatten()
                    .map(|&f| if f == best { 1.0 } else { f as f64 / best as f64 })
                    .reduce(f64::max)
            })
            .fold(1.0, f64::max)
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            g[0] = lo;
            g[count - 1] = hi;
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(runs: Vec<Vec<Option<u64>>>) -> HitTable {
        let methods = (0..runs[0].len()).map(|i| format!("m{i}")).collect();
        HitTable::new(methods, runs).unwrap()
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(relative_error(1.0, 1.0).unwrap(), 0.0);
        assert!(relative_error(1.0, 0.0).is_err());
        // threshold tau = 1 with f* = 1 is hit iff f <= 2
        assert!(relative_error(2.0, 1.0).unwrap() <= 1.0);
        assert!(relative_error(2.0001, 1.0).unwrap() > 1.0);
    }

    #[test]
    fn unique_winner_and_tie() {
        let t = table(vec![vec![Some(100), Some(200)]]);
        let pi = t.winning_probability();
        assert_eq!((pi["m0"], pi["m1"]), (1.0, 0.0));
        let t = table(vec![vec![Some(100), Some(100)]]);
        let pi = t.winning_probability();
        assert_eq!((pi["m0"], pi["m1"]), (1.0, 1.0));
    }

    #[test]
    fn runs_without_hits_count_in_denominator() {
        let t = table(vec![
            vec![Some(10), None],
            vec![None, None],
            vec![Some(30), Some(20)],
        ]);
        let pi = t.winning_probability();
        assert_eq!(pi["m0"], 1.0 / 3.0);
        assert_eq!(pi["m1"], 1.0 / 3.0);
    }

    #[test]
    fn profile_hand_table() {
        let t = table(vec![vec![Some(100), Some(150)], vec![Some(300), Some(100)]]);
        let pp = t.profile_at(1.5);
        assert_eq!(pp["m0"], 0.5);
        assert_eq!(pp["m1"], 1.0);
    }

    #[test]
    fn hit_curve_first_hit() {
        let c = HitCurve::from_points([(0, 5.0), (10, 6.0), (20, 2.0), (30, 2.0), (40, 0.5)]);
        assert_eq!(c.0, vec![(0, 5.0), (20, 2.0), (40, 0.5)]);
        assert_eq!(c.first_hit(10.0), Some(0));
        assert_eq!(c.first_hit(2.0), Some(20));
        assert_eq!(c.first_hit(1.0), Some(40));
        assert_eq!(c.first_hit(0.1), None);
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = log_grid(0.01, 3.5, 50);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[49], 3.5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
