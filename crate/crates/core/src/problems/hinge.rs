//! L2-regularised hinge loss `reg ||x||^2 + (1/|S|) Σ_{i∈S} max(0, 1 - z_i x·w_i)`.
//!
//! At a point `x` each term is classified by its margin `t_i = 1 - z_i x·w_i`:
//! active (`t_i > kink_tol`), inactive (`t_i < -kink_tol`) or kink. The
//! subdifferential of `f_S` is the box
//! `2 reg x + (1/|S|) (Σ_active u_i + Σ_kink β_i u_i)`, `β ∈ [0,1]^kinks`,
//! with `u_i = -z_i w_i`. Every β gives a valid subgradient.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{DescentHint, Problem, Subgradient, Vector};

pub const DEFAULT_REG_COEFF: f64 = 10.0;
pub const DEFAULT_KINK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HingeParams {
    pub reg_coeff: f64,
    pub kink_tol: f64,
}

impl Default for HingeParams {
    fn default() -> Self {
        HingeParams { reg_coeff: DEFAULT_REG_COEFF, kink_tol: DEFAULT_KINK_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermState {
    Active,
    Kink,
    Inactive,
}

/// Result of [`HingeLossSvm::descent_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct DescentSelection {
    pub g: Vector,
    /// Kink coefficients chosen, in index-set order of the kink terms.
    pub beta: Vec<f64>,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct HingeLossSvm {
    data: Arc<Dataset>,
    params: HingeParams,
}

impl HingeLossSvm {
    pub fn new(data: Arc<Dataset>, params: HingeParams) -> Result<Self> {
        if !(params.reg_coeff >= 0.0 && params.reg_coeff.is_finite()) {
            return Err(Error::usage(format!(
                "reg_coeff must be finite and >= 0, got {}",
                params.reg_coeff
            )));
        }
        if !(params.kink_tol > 0.0 && params.kink_tol.is_finite()) {
            return Err(Error::usage(format!("kink_tol must be > 0, got {}", params.kink_tol)));
        }
        if data.n_rows() == 0 {
            return Err(Error::usage("hinge loss needs at least one row"));
        }
        Ok(HingeLossSvm { data, params })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn params(&self) -> HingeParams {
        self.params
    }

    fn check(&self, x: &Vector, idx: &[usize]) -> Result<()> {
        x.check_dim(self.data.n_cols())?;
        if idx.is_empty() {
            return Err(Error::usage("index set is empty"));
        }
        if let Some(i) = idx.iter().find(|&&i| i >= self.data.n_rows()) {
            return Err(Error::usage(format!(
                "index {i} outside ground set of size {}",
                self.data.n_rows()
            )));
        }
        Ok(())
    }

    /// `1 - z_i x·w_i`
    pub fn margin(&self, x: &Vector, i: usize) -> f64 {
        1.0 - self.data.label(i) * self.data.row(i).dot(x.as_slice())
    }

    pub fn classify(&self, margin: f64) -> TermState {
        if margin > self.params.kink_tol {
            TermState::Active
        } else if margin < -self.params.kink_tol {
            TermState::Inactive
        } else {
            TermState::Kink
        }
    }

    /// Index-set positions whose term sits at a kink.
    pub fn kinks(&self, x: &Vector, idx: &[usize]) -> Result<Vec<usize>> {
        self.check(x, idx)?;
        Ok(idx
            .iter()
            .copied()
            .filter(|&i| self.classify(self.margin(x, i)) == TermState::Kink)
            .collect())
    }

    pub fn hinge_value(&self, x: &Vector, idx: &[usize]) -> Result<f64> {
        self.check(x, idx)?;
        let loss: f64 = idx.iter().map(|&i| self.margin(x, i).max(0.0)).sum();
        Ok(self.params.reg_coeff * x.norm_sq() + loss / idx.len() as f64)
    }

    /// `2 reg x + (1/|S|) Σ_active u_i` plus the kink list.
    fn smooth_part(&self, x: &Vector, idx: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let inv = 1.0 / idx.len() as f64;
        let mut g: Vec<f64> = x.as_slice().iter().map(|v| 2.0 * self.params.reg_coeff * v).collect();
        let mut kinks = Vec::new();
        for &i in idx {
            match self.classify(self.margin(x, i)) {
                TermState::Active => self.data.row(i).axpy_into(-self.data.label(i) * inv, &mut g),
                TermState::Kink => kinks.push(i),
                TermState::Inactive => {}
            }
        }
        (g, kinks)
    }

    /// Subgradient with kink coefficients `beta`, one per kink term in
    /// index-set order.
    pub fn hinge_subgradient(&self, x: &Vector, idx: &[usize], beta: &[f64]) -> Result<Vector> {
        self.check(x, idx)?;
        let (mut g, kinks) = self.smooth_part(x, idx);
        if beta.len() != kinks.len() {
            return Err(Error::usage(format!(
                "{} kink coefficients given for {} kink terms",
                beta.len(),
                kinks.len()
            )));
        }
        if let Some(b) = beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::usage(format!("kink coefficient {b} outside [0, 1]")));
        }
        let inv = 1.0 / idx.len() as f64;
        for (&i, &b) in kinks.iter().zip(beta) {
            self.data.row(i).axpy_into(-b * self.data.label(i) * inv, &mut g);
        }
        Vector::new(g)
    }

    /// Exact `sup_{g ∈ ∂f_S(x)} g·p`.
    pub fn directional_sup(&self, x: &Vector, idx: &[usize], p: &Vector) -> Result<f64> {
        self.check(x, idx)?;
        p.check_dim(x.dim())?;
        let (g, kinks) = self.smooth_part(x, idx);
        Ok(self.sup_from_parts(&g, &kinks, idx.len(), p.as_slice()))
    }

    fn sup_from_parts(&self, smooth: &[f64], kinks: &[usize], n: usize, p: &[f64]) -> f64 {
        let base: f64 = smooth.iter().zip(p).map(|(a, b)| a * b).sum();
        let kink: f64 = kinks
            .iter()
            .map(|&i| (-self.data.label(i) * self.data.row(i).dot(p)).max(0.0))
            .sum();
        base + kink / n as f64
    }

    /// Greedy one-sweep corner search for a subgradient whose direction
    /// `p = -zeta g` satisfies `sup ∂f·p <= -(margin/2) ||p||^2`.
    ///
    /// Starts from β = 0 and sets each β_i = 1 in turn when that lowers the
    /// directional sup along the updated direction. The returned `g` is a
    /// valid subgradient whether or not it certifies.
    pub fn descent_select(
        &self,
        x: &Vector,
        idx: &[usize],
        zeta: f64,
        margin: f64,
    ) -> Result<DescentSelection> {
        self.check(x, idx)?;
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::usage(format!("zeta must be finite and > 0, got {zeta}")));
        }
        if !(margin > 0.0) {
            return Err(Error::usage(format!("descent margin must be > 0, got {margin}")));
        }
        let (smooth, kinks) = self.smooth_part(x, idx);
        let inv = 1.0 / idx.len() as f64;
        let dir = |g: &[f64]| g.iter().map(|v| -zeta * v).collect::<Vec<f64>>();

        let mut g = smooth.clone();
        let mut beta = vec![0.0; kinks.len()];
        let mut best = self.sup_from_parts(&smooth, &kinks, idx.len(), &dir(&g));
        for (k, &i) in kinks.iter().enumerate() {
            let mut trial = g.clone();
            self.data.row(i).axpy_into(-self.data.label(i) * inv, &mut trial);
            let s = self.sup_from_parts(&smooth, &kinks, idx.len(), &dir(&trial));
            if s < best {
                best = s;
                g = trial;
                beta[k] = 1.0;
            }
        }
        let p_norm_sq: f64 = g.iter().map(|v| zeta * zeta * v * v).sum();
        let certified = best <= -(margin / 2.0) * p_norm_sq;
        Ok(DescentSelection { g: Vector::new(g)?, beta, certified })
    }
}

impl Problem for HingeLossSvm {
    fn dim(&self) -> usize {
        self.data.n_cols()
    }

    fn ground_size(&self) -> usize {
        self.data.n_rows()
    }

    fn value(&self, x: &Vector, idx: &[usize]) -> Result<f64> {
        self.hinge_value(x, idx)
    }

    fn subgradient(
        &self,
        x: &Vector,
        idx: &[usize],
        hint: Option<DescentHint>,
    ) -> Result<Subgradient> {
        match hint {
            Some(h) => {
                let sel = self.descent_select(x, idx, h.zeta, h.margin)?;
                Ok(Subgradient { g: sel.g, descent_certified: Some(sel.certified) })
            }
            None => {
                self.check(x, idx)?;
                let (g, _) = self.smooth_part(x, idx);
                Ok(Subgradient { g: Vector::new(g)?, descent_certified: None })
            }
        }
    }

    fn full_value(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.data.n_cols())?;
        let loss: f64 = (0..self.data.n_rows()).map(|i| self.margin(x, i).max(0.0)).sum();
        Ok(self.params.reg_coeff * x.norm_sq() + loss / self.data.n_rows() as f64)
    }
}
