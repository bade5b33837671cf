//! The spectral projected subgradient iteration and its driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::cost::{BudgetExhausted, Charge, FevMeter};
use crate::error::{Error, Result};
use crate::model::{
    DescentHint, FeasibleRegion, Problem, SamplePermutation, SampleSchedule, Vector,
};
use crate::solver::config::{SolverConfig, StepMode, YkPolicy};
use crate::solver::line_search::{ls_step_size, nonmonotone_reference, ValueHistory};
use crate::solver::spectral::spectral_update;
use crate::solver::trace::{RunTrace, StepDiagnostics, Termination, TraceRecord};

/// Solver state at iterate `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Vector,
    pub zeta: f64,
    /// Completed steps; the next step uses the 1-based counter `k + 1`.
    pub k: u64,
    pub n_k: usize,
    /// Recent `f_{N_i}(x_i)` values for the nonmonotone reference.
    pub history: ValueHistory,
    pub meter: FevMeter,
    /// `f_{N_k}(x_k)`, computed for the trace; charged when the algorithm
    /// consumes it.
    pub saa_value: f64,
    /// Subgradient `g_{N_k}(x_k)` computed during the previous step, if any.
    cached_g: Option<Vector>,
}

impl IterateState {
    pub fn cumulative_fev(&self) -> u64 {
        self.meter.used()
    }
}

/// Everything a step needs besides the state.
pub struct StepContext<'a> {
    pub problem: &'a dyn Problem,
    pub region: &'a FeasibleRegion,
    pub config: &'a SolverConfig,
    pub samples: &'a SampleSchedule,
    pub permutation: &'a SamplePermutation,
}

pub enum StepOutcome {
    Advanced(Box<IterateState>, Box<StepDiagnostics>),
    /// The FEV budget ran out mid-step; the partial step was discarded.
    BudgetExhausted,
}

enum StepError {
    Budget,
    Fail(Error),
}

impl From<BudgetExhausted> for StepError {
    fn from(_: BudgetExhausted) -> Self {
        StepError::Budget
    }
}

impl From<Error> for StepError {
    fn from(e: Error) -> Self {
        StepError::Fail(e)
    }
}

/// Componentwise uniform on (0, 1), then projected onto `region`.
pub fn initial_point(dim: usize, region: &FeasibleRegion, seed: u64) -> Result<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_1a17_u64);
    let raw: Vec<f64> = (0..dim)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        })
        .collect();
    region.project(&Vector::new(raw)?)
}

impl<'a> StepContext<'a> {
    fn hint(&self, zeta: f64) -> Option<DescentHint> {
        self.config
            .descent_select
            .then_some(DescentHint { zeta, margin: self.config.descent_margin })
    }

    fn prepare(&self, g: Vector) -> Result<Vector> {
        if self.config.normalize_subgradient {
            let n = g.norm();
            if n > 0.0 {
                return g.scale(1.0 / n);
            }
        }
        Ok(g)
    }

    fn subgradient(
        &self,
        meter: &mut FevMeter,
        x: &Vector,
        idx: &[usize],
        zeta: f64,
    ) -> std::result::Result<(Vector, Option<bool>), StepError> {
        meter.charge(Charge::Subgradient, idx.len())?;
        let sg = self.problem.subgradient(x, idx, self.hint(zeta))?;
        Ok((sg.g, sg.descent_certified))
    }

    /// Initial state at `x0` (projected if needed).
    pub fn initial_state(&self, x0: &Vector, budget: u64) -> Result<IterateState> {
        x0.check_dim(self.problem.dim())?;
        let x = self.region.project(x0)?;
        let n_k = self.samples.n0();
        let saa_value = self.problem.value(&x, self.permutation.prefix(n_k)?)?;
        let capacity = match self.config.mode {
            StepMode::LineSearch { c, .. } => c,
            StepMode::Predefined { .. } => 1,
        };
        Ok(IterateState {
            x,
            zeta: self.config.spectral.clamp(self.config.zeta0),
            k: 0,
            n_k,
            history: ValueHistory::new(capacity),
            meter: FevMeter::new(budget),
            saa_value,
            cached_g: None,
        })
    }

    /// One pass of direction, step size, projection, sample update and
    /// spectral update.
    pub fn step(&self, state: &IterateState) -> Result<StepOutcome> {
        match self.try_step(state) {
            Ok((s, d)) => Ok(StepOutcome::Advanced(Box::new(s), Box::new(d))),
            Err(StepError::Budget) => Ok(StepOutcome::BudgetExhausted),
            Err(StepError::Fail(e)) => Err(e),
        }
    }

    fn try_step(
        &self,
        state: &IterateState,
    ) -> std::result::Result<(IterateState, StepDiagnostics), StepError> {
        let cfg = self.config;
        let t = state.k + 1;
        let mut meter = state.meter.clone();
        let start_fev = meter.used();
        let idx = self.permutation.prefix(state.n_k)?;
        let x = &state.x;

        // direction
        let (g_raw, certified) = match &state.cached_g {
            Some(g) => {
                meter.charge(Charge::CachedReuse, idx.len())?;
                (g.clone(), None)
            }
            None => self.subgradient(&mut meter, x, idx, state.zeta)?,
        };
        let g_bar = self.prepare(g_raw.clone())?;
        let p = g_bar.scale(-state.zeta)?;

        // step size
        let mut history = state.history.clone();
        let (alpha, line_search) = match cfg.mode {
            StepMode::Predefined { scale } => (scale / t as f64, None),
            StepMode::LineSearch { eta, c } => {
                meter.charge(Charge::Value, idx.len())?;
                history.push(state.saa_value);
                let reference = nonmonotone_reference(&history, c)?;
                let p_norm_sq = p.norm_sq();
                let out = ls_step_size(
                    t,
                    &cfg.step,
                    |a| -> std::result::Result<f64, StepError> {
                        meter.charge(Charge::LineSearchTrial, idx.len())?;
                        let trial = x.add_scaled(a, &p)?;
                        Ok(self.problem.value(&trial, idx)?)
                    },
                    reference,
                    eta,
                    p_norm_sq,
                )?;
                (out.alpha, Some(out))
            }
        };

        // projection
        let x_next = self.region.project(&x.add_scaled(alpha, &p)?)?;
        let s = x_next.sub(x)?;

        // sample size
        let n_next = self.samples.next(state.n_k)?;
        let idx_next = self.permutation.prefix(n_next)?;

        // spectral coefficient; skipped when the bounds pin it
        let (zeta_next, cached_g) = if !cfg.uses_spectral() {
            (state.zeta, None)
        } else {
            match cfg.y_policy {
                YkPolicy::SameSample => {
                    let (g_new, _) = self.subgradient(&mut meter, &x_next, idx, state.zeta)?;
                    let y = self.prepare(g_new.clone())?.sub(&g_bar)?;
                    let z = spectral_update(&s, &y, &cfg.spectral, state.zeta);
                    // same index set next time: reuse as the next direction
                    (z, (n_next == state.n_k).then_some(g_new))
                }
                YkPolicy::CrossSample => {
                    let (g_new, _) = self.subgradient(&mut meter, &x_next, idx_next, state.zeta)?;
                    let y = self.prepare(g_new.clone())?.sub(&g_bar)?;
                    let z = spectral_update(&s, &y, &cfg.spectral, state.zeta);
                    (z, Some(g_new))
                }
                YkPolicy::NextSample => {
                    let (g_new, _) = self.subgradient(&mut meter, &x_next, idx_next, state.zeta)?;
                    let g_old = if n_next == state.n_k {
                        meter.charge(Charge::CachedReuse, idx_next.len())?;
                        g_raw
                    } else {
                        self.subgradient(&mut meter, x, idx_next, state.zeta)?.0
                    };
                    let y = self.prepare(g_new.clone())?.sub(&self.prepare(g_old)?)?;
                    let z = spectral_update(&s, &y, &cfg.spectral, state.zeta);
                    (z, Some(g_new))
                }
            }
        };

        let saa_value = self.problem.value(&x_next, idx_next)?;
        let diagnostics = StepDiagnostics {
            k: t,
            alpha,
            subgradient_norm: g_bar.norm(),
            descent_certified: certified,
            line_search,
            fev_step: meter.used() - start_fev,
            ebar: None,
        };
        let next = IterateState {
            x: x_next,
            zeta: zeta_next,
            k: t,
            n_k: n_next,
            history,
            meter,
            saa_value,
            cached_g,
        };
        Ok((next, diagnostics))
    }
}

/// Instrumentation evaluated outside the FEV budget.
struct Probe<'a> {
    problem: &'a dyn Problem,
    permutation: &'a SamplePermutation,
    x_ref: Vector,
    /// `(N, f_N(x_ref))` memo; the sample size changes rarely.
    ref_saa: Option<(usize, f64)>,
    f_ref: f64,
}

impl<'a> Probe<'a> {
    fn ebar(&mut self, state: &IterateState, f_true: f64) -> Result<f64> {
        let ref_saa = match self.ref_saa {
            Some((n, v)) if n == state.n_k => v,
            _ => {
                let v = self.problem.value(&self.x_ref, self.permutation.prefix(state.n_k)?)?;
                self.ref_saa = Some((state.n_k, v));
                v
            }
        };
        Ok((state.saa_value - f_true).abs() + (ref_saa - self.f_ref).abs())
    }
}

fn record(state: &IterateState, alpha: Option<f64>, f_true: Option<f64>) -> TraceRecord {
    TraceRecord {
        k: state.k,
        n_k: state.n_k,
        alpha,
        zeta: state.zeta,
        fev_cum: state.meter.used(),
        f_saa: state.saa_value,
        f_true,
    }
}

/// Runs from a point drawn by [`initial_point`] with the config's seed.
pub fn run(
    problem: &dyn Problem,
    region: &FeasibleRegion,
    config: &SolverConfig,
    budget: u64,
) -> Result<RunTrace> {
    config.validate()?;
    let x0 = initial_point(problem.dim(), region, config.seed)?;
    run_from(problem, region, config, budget, &x0)
}

/// Iterates until the FEV budget or `max_iter` is exhausted.
pub fn run_from(
    problem: &dyn Problem,
    region: &FeasibleRegion,
    config: &SolverConfig,
    budget: u64,
    x0: &Vector,
) -> Result<RunTrace> {
    config.validate()?;
    region.validate()?;
    if let Some(d) = region.dim() {
        if d != problem.dim() {
            return Err(Error::config(format!(
                "region dimension {d} differs from problem dimension {}",
                problem.dim()
            )));
        }
    }
    let n = problem.ground_size();
    if n == 0 {
        return Err(Error::config("problem has an empty ground set"));
    }
    let samples = config.sample.schedule(n)?;
    let permutation = SamplePermutation::seeded(n, config.seed);
    let ctx = StepContext { problem, region, config, samples: &samples, permutation: &permutation };

    let mut state = ctx.initial_state(x0, budget)?;
    let mut probe = if config.track_true {
        let f_ref = problem.full_value(&state.x)?;
        Some(Probe { problem, permutation: &permutation, x_ref: state.x.clone(), ref_saa: None, f_ref })
    } else {
        None
    };
    let x_start = state.x.clone();
    let f0 = probe.as_ref().map(|p| p.f_ref);
    let mut records = vec![record(&state, None, f0)];
    let mut steps = Vec::new();
    let mut termination = Termination::MaxIter;

    while state.k < config.max_iter {
        match ctx.step(&state)? {
            StepOutcome::BudgetExhausted => {
                termination = Termination::Budget;
                break;
            }
            StepOutcome::Advanced(next, mut diag) => {
                let f_true = match &mut probe {
                    Some(p) => {
                        let f = problem.full_value(&next.x)?;
                        diag.ebar = Some(p.ebar(&next, f)?);
                        Some(f)
                    }
                    None => None,
                };
                records.push(record(&next, Some(diag.alpha), f_true));
                steps.push(*diag);
                state = *next;
            }
        }
    }
    if termination == Termination::MaxIter && state.meter.used() >= budget {
        termination = Termination::Budget;
    }

    Ok(RunTrace {
        records,
        steps,
        termination,
        fev: state.meter.breakdown(),
        x0: x_start,
        x_final: state.x,
    })
}
