//! Multi-method, multi-dataset, multi-seed experiment campaigns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::metrics::{log_grid, ErrorMode, HitCurve, HitTable};
use crate::data::{load_libsvm, split, Dataset};
use crate::error::{Error, Result};
use crate::model::{FeasibleRegion, Problem, Vector};
use crate::problems::{separable_blobs, BlobSpec, HingeLossSvm, HingeParams};
use crate::solver::{initial_point, run_from, Method, RunTrace, SolverConfig};

pub const SCHEMA: &str = "nsopt/1";

/// Default FEV budget per run, in units of `N * n`.
pub const DEFAULT_BUDGET_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<BlobSpec>,
    /// Keep only the training part of a seeded split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
    #[serde(default)]
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Log { lo: f64, hi: f64, count: usize },
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Log { lo, hi, count } => log_grid(*lo, *hi, *count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FStarSpec {
    /// Optimal values supplied per dataset name.
    Given { values: BTreeMap<String, f64> },
    /// Best full-sample value visited by LS-SPS-F under
    /// `budget_multiplier` times the campaign budget.
    Reference {
        #[serde(default = "default_reference_multiplier")]
        budget_multiplier: f64,
    },
}

fn default_reference_multiplier() -> f64 {
    50.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetSpec {
    Units(u64),
    PerEntry { per_entry: f64 },
}

fn default_tau_grid() -> GridSpec {
    GridSpec::Log { lo: 0.01, hi: 3.5, count: 50 }
}

fn default_q_grid() -> GridSpec {
    GridSpec::Log { lo: 1.0, hi: 10.0, count: 40 }
}

fn default_profile_tau() -> f64 {
    1.0
}

fn default_region() -> FeasibleRegion {
    FeasibleRegion::Ball { radius_sq: 0.1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub methods: Vec<Method>,
    pub datasets: Vec<DatasetSpec>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<BudgetSpec>,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: GridSpec,
    #[serde(default = "default_q_grid")]
    pub q_grid: GridSpec,
    #[serde(default = "default_profile_tau")]
    pub profile_tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<FStarSpec>,
    #[serde(default)]
    pub error_mode: ErrorMode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub problem: HingeParams,
    #[serde(default = "default_region")]
    pub region: FeasibleRegion,
}

impl CampaignSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("campaign spec: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read campaign spec {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.schema {
            if s != SCHEMA {
                return Err(Error::config(format!("unsupported schema '{s}', expected '{SCHEMA}'")));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("campaign lists no methods"));
        }
        if self.datasets.is_empty() {
            return Err(Error::config("campaign lists no datasets"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("campaign lists no seeds"));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("dataset names must be unique"));
        }
        for d in &self.datasets {
            if d.name.is_empty() || !d.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                return Err(Error::config(format!(
                    "dataset name '{}' must be nonempty and use only [A-Za-z0-9._-]",
                    d.name
                )));
            }
            if d.path.is_some() == d.synthetic.is_some() {
                return Err(Error::config(format!(
                    "dataset '{}' needs exactly one of 'path' or 'synthetic'",
                    d.name
                )));
            }
        }
        match &self.f_star {
            None => {
                return Err(Error::config(
                    "campaign needs an 'f_star' section (given values or reference mode)",
                ))
            }
            Some(FStarSpec::Given { values }) => {
                for d in &self.datasets {
                    let v = values.get(&d.name).ok_or_else(|| {
                        Error::config(format!("no f* given for dataset '{}'", d.name))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::config(format!("f* for '{}' is not finite", d.name)));
                    }
                    if self.error_mode == ErrorMode::Relative && *v == 0.0 {
                        return Err(Error::config(format!(
                            "f* = 0 for '{}' makes the relative error undefined",
                            d.name
                        )));
                    }
                }
            }
            Some(FStarSpec::Reference { budget_multiplier }) => {
                if !(*budget_multiplier >= 1.0 && budget_multiplier.is_finite()) {
                    return Err(Error::config("reference budget multiplier must be >= 1"));
                }
            }
        }
        let taus = self.tau_grid.points();
        if taus.is_empty() || taus.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("tau grid must be nonempty and finite"));
        }
        let qs = self.q_grid.points();
        if qs.is_empty() || qs.iter().any(|q| !(*q >= 1.0 && q.is_finite())) || qs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("q grid must be sorted, finite and >= 1"));
        }
        if let Some(BudgetSpec::PerEntry { per_entry }) = self.budget {
            if !(per_entry >= 0.0 && per_entry.is_finite()) {
                return Err(Error::config("budget factor must be finite and >= 0"));
            }
        }
        self.solver.validate()?;
        self.region.validate()?;
        HingeParams::validate(&self.problem)?;
        Ok(())
    }

    pub fn budget_for(&self, n_rows: usize, n_cols: usize) -> u64 {
        let factor = match self.budget {
            Some(BudgetSpec::Units(u)) => return u,
            Some(BudgetSpec::PerEntry { per_entry }) => per_entry,
            None => DEFAULT_BUDGET_FACTOR,
        };
        (factor * n_rows as f64 * n_cols as f64).round() as u64
    }

    /// Loads every dataset. Relative paths resolve against `base`.
    pub fn load_datasets(&self, base: &Path) -> Result<Vec<(String, Arc<Dataset>)>> {
        self.datasets
            .iter()
            .map(|d| {
                let data = match (&d.path, &d.synthetic) {
                    (Some(p), _) => {
                        let p = if p.is_absolute() { p.clone() } else { base.join(p) };
                        load_libsvm(&p).map_err(|e| match e {
                            Error::Io(io) => Error::config(format!("dataset '{}' ({}): {io}", d.name, p.display())),
                            other => other,
                        })?
                    }
                    (None, Some(s)) => separable_blobs(s)?,
                    (None, None) => unreachable!("validated"),
                };
                let data = match d.train_fraction {
                    Some(f) => split(&data, f, d.split_seed)?.0,
                    None => data,
                };
                if data.n_rows() == 0 || data.n_cols() == 0 {
                    return Err(Error::config(format!("dataset '{}' is empty", d.name)));
                }
                Ok((d.name.clone(), Arc::new(data)))
            })
            .collect()
    }
}

impl HingeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.reg_coeff >= 0.0 && self.reg_coeff.is_finite()) {
            return Err(Error::config(format!("reg_coeff must be >= 0, got {}", self.reg_coeff)));
        }
        if !(self.kink_tol > 0.0 && self.kink_tol.is_finite()) {
            return Err(Error::config(format!("kink_tol must be > 0, got {}", self.kink_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStarProvenance {
    Given,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FStar {
    pub value: f64,
    pub provenance: FStarProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub dataset: String,
    pub seed: u64,
    pub method: Method,
    pub iterations: u64,
    pub final_fev: u64,
    pub final_f_true: f64,
    pub best_f_true: f64,
    /// Record-breaking `(fev, error)` points.
    pub hit_curve: HitCurve,
    /// First-hit FEV per entry of the tau grid.
    pub first_hits: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub dataset: String,
    pub seed: u64,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub schema: String,
    pub methods: Vec<Method>,
    /// Run identities `(dataset, seed)`, in table order.
    pub runs: Vec<(String, u64)>,
    pub f_star: BTreeMap<String, FStar>,
    pub error_mode: ErrorMode,
    pub budgets: BTreeMap<String, u64>,
    pub tau_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub profile_tau: f64,
    pub outcomes: Vec<RunOutcome>,
    pub failures: Vec<RunFailure>,
    /// Full traces aligned with `outcomes`; not serialized.
    #[serde(skip)]
    pub traces: Vec<RunTrace>,
}

impl CampaignResult {
    pub fn outcome(&self, dataset: &str, seed: u64, method: Method) -> Option<&RunOutcome> {
        self.outcomes
            .iter()
            .find(|o| o.dataset == dataset && o.seed == seed && o.method == method)
    }

    pub fn trace(&self, dataset: &str, seed: u64, method: Method) -> Option<&RunTrace> {
        self.outcomes
            .iter()
            .position(|o| o.dataset == dataset && o.seed == seed && o.method == method)
            .and_then(|i| self.traces.get(i))
    }

    /// First-hit table at an arbitrary threshold. Failed runs never hit.
    pub fn hit_table(&self, tau: f64) -> HitTable {
        let runs = self
            .runs
            .iter()
            .map(|(d, s)| {
                self.methods
                    .iter()
                    .map(|&m| self.outcome(d, *s, m).and_then(|o| o.hit_curve.first_hit(tau)))
                    .collect()
            })
            .collect();
        HitTable {
            methods: self.methods.iter().map(|m| m.name().to_string()).collect(),
            runs,
        }
    }

    pub fn winning_probability(&self, tau: f64) -> BTreeMap<String, f64> {
        self.hit_table(tau).winning_probability()
    }

    pub fn performance_profile(&self, tau: f64, q_grid: &[f64]) -> Result<BTreeMap<String, Vec<f64>>> {
        self.hit_table(tau).performance_profile(q_grid)
    }
}

/// Builds per-run outcome data from a trace.
pub fn summarize(
    dataset: &str,
    seed: u64,
    method: Method,
    trace: &RunTrace,
    f_star: f64,
    mode: ErrorMode,
    tau_grid: &[f64],
) -> Result<RunOutcome> {
    let mut points = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        let f = r.f_true.ok_or_else(|| Error::config("campaign runs must track the true objective"))?;
        points.push((r.fev_cum, mode.error(f, f_star)?));
    }
    let hit_curve = HitCurve::from_points(points);
    let first_hits = tau_grid.iter().map(|&t| hit_curve.first_hit(t)).collect();
    let last = trace.last();
    Ok(RunOutcome {
        dataset: dataset.to_string(),
        seed,
        method,
        iterations: last.k,
        final_fev: last.fev_cum,
        final_f_true: last.f_true.unwrap_or(f64::NAN),
        best_f_true: trace.best_true().unwrap_or(f64::NAN),
        hit_curve,
        first_hits,
    })
}

/// Seed of the shared initial point for run `(dataset index, seed)`.
fn initial_seed(dataset_index: usize, seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(dataset_index as u64)
}

/// Executes every `(dataset, seed, method)` combination.
///
/// All methods in one run share the initial point and sample permutation.
/// `parallelism` bounds the worker threads; results do not depend on it.
pub fn run_campaign(
    spec: &CampaignSpec,
    datasets: &[(String, Arc<Dataset>)],
    parallelism: usize,
) -> Result<CampaignResult> {
    spec.validate()?;
    let tau_grid = spec.tau_grid.points();
    let q_grid = spec.q_grid.points();
    let mut base = spec.solver.clone();
    base.track_true = true;

    let problems: Vec<(String, Arc<HingeLossSvm>)> = datasets
        .iter()
        .map(|(name, d)| Ok((name.clone(), Arc::new(HingeLossSvm::new(d.clone(), spec.problem)?))))
        .collect::<Result<_>>()?;
    if let Some(d) = spec.region.dim() {
        if let Some((name, p)) = problems.iter().find(|(_, p)| p.dim() != d) {
            return Err(Error::config(format!(
                "region dimension {d} differs from dataset '{name}' dimension {}",
                p.dim()
            )));
        }
    }
    let budgets: BTreeMap<String, u64> = problems
        .iter()
        .map(|(name, p)| (name.clone(), spec.budget_for(p.ground_size(), p.dim())))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;

    let f_star = pool.install(|| resolve_f_star(spec, &problems, &budgets, &base))?;

    let mut runs = Vec::new();
    let mut jobs = Vec::new();
    for (di, (name, _)) in problems.iter().enumerate() {
        for &seed in &spec.seeds {
            runs.push((name.clone(), seed));
            for &method in &spec.methods {
                jobs.push((di, seed, method));
            }
        }
    }

    let results: Vec<std::result::Result<(RunOutcome, RunTrace), RunFailure>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(di, seed, method)| {
                let (name, problem) = &problems[di];
                let attempt = || -> Result<(RunOutcome, RunTrace)> {
                    let x0 = initial_point(problem.dim(), &spec.region, initial_seed(di, seed))?;
                    let mut cfg = method.configure(&base);
                    cfg.seed = seed;
                    let trace = run_from(problem.as_ref(), &spec.region, &cfg, budgets[name], &x0)?;
                    let outcome =
                        summarize(name, seed, method, &trace, f_star[name].value, spec.error_mode, &tau_grid)?;
                    Ok((outcome, trace))
                };
                attempt().map_err(|e| RunFailure {
                    dataset: name.clone(),
                    seed,
                    method,
                    error: e.to_string(),
                })
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((o, t)) => {
                outcomes.push(o);
                traces.push(t);
            }
            Err(f) => failures.push(f),
        }
    }

    Ok(CampaignResult {
        schema: SCHEMA.to_string(),
        methods: spec.methods.clone(),
        runs,
        f_star,
        error_mode: spec.error_mode,
        budgets,
        tau_grid,
        q_grid,
        profile_tau: spec.profile_tau,
        outcomes,
        failures,
        traces,
    })
}

fn resolve_f_star(
    spec: &CampaignSpec,
    problems: &[(String, Arc<HingeLossSvm>)],
    budgets: &BTreeMap<String, u64>,
    base: &SolverConfig,
) -> Result<BTreeMap<String, FStar>> {
    match spec.f_star.as_ref().expect("validated") {
        FStarSpec::Given { values } => Ok(problems
            .iter()
            .map(|(name, _)| {
                (name.clone(), FStar { value: values[name], provenance: FStarProvenance::Given })
            })
            .collect()),
        FStarSpec::Reference { budget_multiplier } => problems
            .par_iter()
            .enumerate()
            .map(|(di, (name, problem))| {
                let seed = spec.seeds[0];
                let x0 = initial_point(problem.dim(), &spec.region, initial_seed(di, seed))?;
                let value = reference_f_star(
                    problem.as_ref(),
                    &spec.region,
                    base,
                    (budgets[name] as f64 * budget_multiplier).round() as u64,
                    seed,
                    &x0,
                )?;
                if spec.error_mode == ErrorMode::Relative && value == 0.0 {
                    return Err(Error::config(format!(
                        "reference f* for '{name}' is 0; relative error undefined"
                    )));
                }
                Ok((name.clone(), FStar { value, provenance: FStarProvenance::Reference }))
            })
            .collect(),
    }
}

/// Best full-sample value visited by LS-SPS-F from `x0` under `budget`.
pub fn reference_f_star(
    problem: &dyn Problem,
    region: &FeasibleRegion,
    base: &SolverConfig,
    budget: u64,
    seed: u64,
    x0: &Vector,
) -> Result<f64> {
    let mut cfg = Method::LsSpsF.configure(base);
    cfg.seed = seed;
    cfg.track_true = true;
    let trace = run_from(problem, region, &cfg, budget, x0)?;
    trace
        .best_true()
        .ok_or_else(|| Error::config("reference run produced no objective values"))
}

/// Non-deterministic bookkeeping kept apart from the replayable results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub created_unix_s: u64,
    pub elapsed_ms: u64,
    pub parallelism: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema: String,
    pub deterministic: CampaignResult,
    pub meta: RunMeta,
}

impl ResultsDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultsDocument =
            serde_json::from_str(text).map_err(|e| Error::config(format!("results file: {e}")))?;
        if doc.schema != SCHEMA {
            return Err(Error::config(format!("unsupported results schema '{}'", doc.schema)));
        }
        Ok(doc)
    }
}

pub fn trace_file_name(dataset: &str, method: Method, seed: u64) -> String {
    format!("{dataset}__{}__seed{seed}.csv", method.name())
}

/// Rows `(kind, method, x, value)`: winning probability over the tau grid,
/// then the performance profile at `tau` over `q_grid`.
pub fn profile_rows(result: &CampaignResult, tau: f64, q_grid: &[f64]) -> Result<Vec<(String, String, f64, f64)>> {
    let mut rows = Vec::new();
    let pis: Vec<BTreeMap<String, f64>> =
        result.tau_grid.iter().map(|&t| result.winning_probability(t)).collect();
    let pp = result.performance_profile(tau, q_grid)?;
    for m in &result.methods {
        let name = m.name().to_string();
        for (t, pi) in result.tau_grid.iter().zip(&pis) {
            rows.push(("winning_probability".into(), name.clone(), *t, pi[&name]));
        }
        for (q, v) in q_grid.iter().zip(&pp[&name]) {
            rows.push(("performance_profile".into(), name.clone(), *q, *v));
        }
    }
    Ok(rows)
}

pub fn write_profiles_csv<W: std::io::Write>(
    result: &CampaignResult,
    tau: f64,
    q_grid: &[f64],
    mut out: W,
) -> Result<()> {
    let rows = profile_rows(result, tau, q_grid)?;
    writeln!(out, "# schema: {SCHEMA}")?;
    writeln!(out, "# performance profile at tau = {}", crate::solver::trace::fmt_real(tau))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "method", "x", "value"])?;
    for (kind, method, x, v) in rows {
        w.write_record([kind, method, crate::solver::trace::fmt_real(x), crate::solver::trace::fmt_real(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.json`, `profiles.csv`, `traces/*.csv` and, when any run
/// failed, `failures.json` under `dir`.
pub fn write_outputs(dir: &Path, result: &CampaignResult, meta: RunMeta) -> Result<()> {
    let traces_dir = dir.join("traces");
    std::fs::create_dir_all(&traces_dir)?;
    for (o, t) in result.outcomes.iter().zip(&result.traces) {
        let f = std::fs::File::create(traces_dir.join(trace_file_name(&o.dataset, o.method, o.seed)))?;
        t.write_csv(std::io::BufWriter::new(f))?;
    }
    let f = std::fs::File::create(dir.join("profiles.csv"))?;
    write_profiles_csv(result, result.profile_tau, &result.q_grid, std::io::BufWriter::new(f))?;
    if !result.failures.is_empty() {
        #[derive(Serialize)]
        struct Manifest<'a> {
            schema: &'a str,
            failures: &'a [RunFailure],
        }
        let text = serde_json::to_string_pretty(&Manifest { schema: SCHEMA, failures: &result.failures })?;
        std::fs::write(dir.join("failures.json"), text + "\n")?;
    }
    let doc = ResultsDocument { schema: SCHEMA.to_string(), deterministic: result.clone(), meta };
    std::fs::write(dir.join("results.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}
