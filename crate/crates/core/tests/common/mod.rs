#![allow(dead_code)]

use std::sync::Arc;

use nsopt::data::Dataset;
use nsopt::model::Vector;
use nsopt::problems::{separable_blobs, BlobSpec, HingeLossSvm, HingeParams};
use nsopt::solver::{sufficient_decrease, RunTrace, SolverConfig};

/// Four labelled points in the plane.
pub fn toy_rows() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![-1.0, 0.5]],
        vec![1.0, -1.0, 1.0, -1.0],
    )
}

pub fn toy_svm(reg_coeff: f64) -> HingeLossSvm {
    let (rows, labels) = toy_rows();
    let data = Dataset::from_dense(&rows, &labels).unwrap();
    HingeLossSvm::new(Arc::new(data), HingeParams { reg_coeff, ..HingeParams::default() }).unwrap()
}

pub fn blob_svm(n_rows: usize, n_cols: usize, seed: u64) -> HingeLossSvm {
    let data = separable_blobs(&BlobSpec::new(n_rows, n_cols, seed)).unwrap();
    HingeLossSvm::new(Arc::new(data), HingeParams::default()).unwrap()
}

/// Step-rule and Armijo-replay checks on a finished trace. Returns the
/// number of step sizes checked.
pub fn check_step_rules(trace: &RunTrace, cfg: &SolverConfig) -> usize {
    let (c1, c2) = (cfg.step.c1(), cfg.step.c2());
    for (rec, step) in trace.records.iter().skip(1).zip(&trace.steps) {
        assert_eq!(rec.k, step.k);
        let k = step.k as f64;
        assert!(
            step.alpha >= c1 / k && step.alpha <= c2 / k,
            "alpha {} outside [{}, {}] at k = {k}",
            step.alpha,
            c1 / k,
            c2 / k
        );
        assert_eq!(rec.alpha, Some(step.alpha));
        if let Some(ls) = &step.line_search {
            let d = 1.0f64.min(c2 / k);
            let candidates = [d, (d + 1.0 / k) / 2.0, 1.0 / k];
            assert!(candidates.contains(&step.alpha));
            if ls.fallback {
                assert_eq!(step.alpha, 1.0 / k);
                assert!(ls.trials.iter().all(|t| !t.accepted));
            } else {
                let acc = ls.trials.last().unwrap();
                assert!(acc.accepted);
                assert_eq!(acc.alpha, step.alpha);
                assert!(sufficient_decrease(acc.f_trial, ls.reference, ls.eta, acc.alpha, ls.p_norm_sq));
            }
        }
    }
    for r in &trace.records {
        assert!(cfg.spectral.contains(r.zeta), "zeta {} out of bounds", r.zeta);
    }
    trace.steps.len()
}

/// Integer pairs (a, b) with 0.5 a + 0.25 b = 1, so rows (a, b) sit exactly
/// on the hinge at x = (0.5, 0.25).
pub const KINK_ROWS: [(f64, f64); 10] = [
    (2.0, 0.0),
    (0.0, 4.0),
    (1.0, 2.0),
    (3.0, -2.0),
    (4.0, -4.0),
    (-1.0, 6.0),
    (5.0, -6.0),
    (-2.0, 8.0),
    (6.0, -8.0),
    (-3.0, 10.0),
];

pub fn x_kink() -> Vector {
    Vector::new(vec![0.5, 0.25]).unwrap()
}

/// `n_kinks` kink rows (alternating sign so labels mix) plus some rows away
/// from the hinge.
pub fn kink_svm(n_kinks: usize, reg: f64) -> HingeLossSvm {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (j, &(a, b)) in KINK_ROWS.iter().take(n_kinks).enumerate() {
        // z (x·w) = 1 for both signs
        let z = if j % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(vec![z * a, z * b]);
        labels.push(z);
    }
    rows.extend([vec![0.3, -0.7], vec![4.0, 4.0], vec![-1.0, 0.2]]);
    labels.extend([1.0, 1.0, -1.0]);
    let data = Dataset::from_dense(&rows, &labels).unwrap();
    HingeLossSvm::new(Arc::new(data), HingeParams { reg_coeff: reg, ..HingeParams::default() }).unwrap()
}

