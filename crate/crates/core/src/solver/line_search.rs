//! Nonmonotone Armijo acceptance with a three-value candidate ladder.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StepSchedule, Vector};

/// The last `capacity` SAA values `f_{N_i}(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHistory {
    values: VecDeque<f64>,
    capacity: usize,
}

impl ValueHistory {
    pub fn new(capacity: usize) -> Self {
        ValueHistory { values: VecDeque::with_capacity(capacity), capacity: capacity.max(1) }
    }

    pub fn push(&mut self, value: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &f64> {
        self.values.iter()
    }
}

impl FromIterator<f64> for ValueHistory {
    /// Unbounded history holding every value; windowing happens in
    /// [`nonmonotone_reference`].
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let values: VecDeque<f64> = iter.into_iter().collect();
        let capacity = values.len().max(1);
        ValueHistory { values, capacity }
    }
}

/// Maximum over the most recent `min(c, len)` stored values.
pub fn nonmonotone_reference(history: &ValueHistory, c: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::usage("nonmonotone reference of an empty history"));
    }
    if c == 0 {
        return Err(Error::usage("nonmonotone window c must be >= 1"));
    }
    Ok(history.iter().rev().take(c).copied().fold(f64::NEG_INFINITY, f64::max))
}

/// `f_trial <= reference - eta * alpha * ||p||^2`, with `||p||^2` given.
pub fn sufficient_decrease(f_trial: f64, reference: f64, eta: f64, alpha: f64, p_norm_sq: f64) -> bool {
    f_trial <= reference - eta * alpha * p_norm_sq
}

pub fn armijo_accepts(f_trial: f64, reference: f64, eta: f64, alpha: f64, p: &Vector) -> bool {
    sufficient_decrease(f_trial, reference, eta, alpha, p.norm_sq())
}

/// Candidate ladder for the 1-based iteration `k`:
/// `(d_k, (d_k + 1/k) / 2, 1/k)` with `d_k = min(1, c2/k)`.
pub fn step_candidates(k: u64, schedule: &StepSchedule) -> Result<[f64; 3]> {
    if k == 0 {
        return Err(Error::usage("line-search counter is 1-based; k = 0 given"));
    }
    let inv_k = 1.0 / k as f64;
    let d = 1.0_f64.min(schedule.c2() / k as f64);
    Ok([d, (d + inv_k) / 2.0, inv_k])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub alpha: f64,
    pub f_trial: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub reference: f64,
    pub eta: f64,
    pub p_norm_sq: f64,
    pub trials: Vec<TrialRecord>,
    /// `true` when no candidate passed and `1/k` was taken untested.
    pub fallback: bool,
}

/// Tries `d_k`, then the midpoint of `[1/k, d_k]`, and falls back to `1/k`.
///
/// `trial(alpha)` returns the SAA value at `x + alpha p`; each call is one
/// charged evaluation. When the midpoint coincides with `d_k` (only at
/// `k = 1`) it is not re-evaluated.
pub fn ls_step_size<E, F>(
    k: u64,
    schedule: &StepSchedule,
    mut trial: F,
    reference: f64,
    eta: f64,
    p_norm_sq: f64,
) -> std::result::Result<LineSearchOutcome, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
    E: From<Error>,
{
    let [d, mid, fallback] = step_candidates(k, schedule)?;
    let mut out = LineSearchOutcome {
        alpha: fallback,
        reference,
        eta,
        p_norm_sq,
        trials: Vec::with_capacity(2),
        fallback: true,
    };
    for (i, alpha) in [d, mid].into_iter().enumerate() {
        if i == 1 && alpha == d {
            break;
        }
        let f_trial = trial(alpha)?;
        let accepted = sufficient_decrease(f_trial, reference, eta, alpha, p_norm_sq);
        out.trials.push(TrialRecord { alpha, f_trial, accepted });
        if accepted {
            out.alpha = alpha;
            out.fallback = false;
            break;
        }
    }
    Ok(out)
}
