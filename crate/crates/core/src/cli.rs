//! Command-line front end: `run`, `campaign`, `profile` and `inspect`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid usage, configuration
//! or input data. Every check that can fail with 2 happens before any
//! output file is created.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{
    run_campaign, write_outputs, write_profiles_csv, CampaignSpec, ResultsDocument, RunMeta,
};
use crate::data::{load_libsvm, split, Dataset};
use crate::error::{Error, Result};
use crate::model::{FeasibleRegion, SpectralBounds, StepSchedule};
use crate::problems::{HingeLossSvm, HingeParams};
use crate::solver::{run, Method, SolverConfig, StepMode, YkPolicy};

pub const SEED_ENV: &str = "NSOPT_SEED";

#[derive(Debug, Parser)]
#[command(name = "nsopt", version, about = "Spectral projected subgradient solvers and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one hinge-loss SVM problem and write its trace.
    Run(RunArgs),
    /// Execute a JSON campaign spec.
    Campaign(CampaignArgs),
    /// Recompute profiles from a campaign's results.json.
    Profile(ProfileArgs),
    /// Summarise a LIBSVM dataset.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// LIBSVM file, plain or `.gz`.
    #[arg(long)]
    pub problem: PathBuf,
    /// JSON run config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// One of sps, sps-f, ls-sps, ls-sps-f, ls-ps, ls-ps-f.
    #[arg(long)]
    pub method: Option<String>,
    /// Falls back to the config file, then NSOPT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// FEV budget; defaults to 50 * N * n.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value = "trace.csv")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = TraceFormat::Csv)]
    pub format: TraceFormat,
    /// Train on this fraction of a seeded split.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Nonmonotone window length.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub zeta_min: Option<f64>,
    #[arg(long)]
    pub zeta_max: Option<f64>,
    /// Scale of the predefined step `scale / k`.
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub y_policy: Option<YPolicyArg>,
    #[arg(long)]
    pub max_iter: Option<u64>,
    #[arg(long)]
    pub reg_coeff: Option<f64>,
    /// Squared radius of the ball constraint.
    #[arg(long)]
    pub radius_sq: Option<f64>,
    /// Use the plain subgradient instead of the descent-preferring one.
    #[arg(long)]
    pub no_descent_select: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum YPolicyArg {
    SameSample,
    CrossSample,
    NextSample,
}

impl From<YPolicyArg> for YkPolicy {
    fn from(p: YPolicyArg) -> Self {
        match p {
            YPolicyArg::SameSample => YkPolicy::SameSample,
            YPolicyArg::CrossSample => YkPolicy::CrossSample,
            YPolicyArg::NextSample => YkPolicy::NextSample,
        }
    }
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// results.json written by `campaign`.
    #[arg(long)]
    pub results: PathBuf,
    /// Target for the performance profile; defaults to the campaign's.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Comma-separated q values; defaults to the campaign's grid.
    #[arg(long, value_delimiter = ',')]
    pub q_grid: Option<Vec<f64>>,
    /// Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

/// Everything that determines a single run, apart from the dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub method: Method,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_fraction: Option<f64>,
    pub split_seed: u64,
    pub problem: HingeParams,
    pub region: FeasibleRegion,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::LsSps,
            seed: 0,
            budget: None,
            train_fraction: None,
            split_seed: 0,
            problem: HingeParams::default(),
            region: FeasibleRegion::Ball { radius_sq: 0.1 },
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("run config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }

    /// The solver config actually handed to the solver.
    pub fn effective_solver(&self) -> SolverConfig {
        let mut cfg = self.method.configure(&self.solver);
        cfg.seed = self.seed;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.region.validate()?;
        if let Some(f) = self.train_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config(format!("train fraction must lie in (0, 1), got {f}")));
            }
        }
        self.effective_solver().validate()
    }
}

enum Failure {
    /// Exit code 2.
    Invalid(Error),
    /// Exit code 1.
    Runtime(Error),
}

fn invalid(e: Error) -> Failure {
    Failure::Invalid(e)
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e)
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let seed_env = std::env::var(SEED_ENV).ok();
    match execute(cli.command, seed_env.as_deref()) {
        Ok(code) => code,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

fn execute(cmd: Command, seed_env: Option<&str>) -> std::result::Result<i32, Failure> {
    match cmd {
        Command::Run(a) => cmd_run(a, seed_env),
        Command::Campaign(a) => cmd_campaign(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Inspect(a) => cmd_inspect(a),
    }
}

fn read_text(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {what} {}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    load_libsvm(path).map_err(|e| match e {
        Error::Io(io) => Error::config(format!("cannot read dataset {}: {io}", path.display())),
        other => other,
    })
}

/// Applies defaults < config file < flags. `NSOPT_SEED` fills the seed only
/// when neither the flag nor the file sets it.
pub fn resolve_run_config(args: &RunArgs, seed_env: Option<&str>) -> Result<RunConfig> {
    let (mut cfg, file_has_seed) = match &args.config {
        Some(p) => {
            let text = read_text(p, "run config")?;
            let raw: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("run config: {e}")))?;
            let has_seed = raw.get("seed").is_some();
            (RunConfig::from_json(&text)?, has_seed)
        }
        None => (RunConfig::default(), false),
    };

    if let Some(m) = &args.method {
        cfg.method = m.parse()?;
    }
    match (args.seed, file_has_seed, seed_env) {
        (Some(s), _, _) => cfg.seed = s,
        (None, false, Some(env)) => {
            cfg.seed = env
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("{SEED_ENV}='{env}' is not an unsigned integer")))?;
        }
        _ => {}
    }
    if args.budget.is_some() {
        cfg.budget = args.budget;
    }
    if args.train_fraction.is_some() {
        cfg.train_fraction = args.train_fraction;
    }
    if let Some(s) = args.split_seed {
        cfg.split_seed = s;
    }
    if args.c1.is_some() || args.c2.is_some() {
        let c1 = args.c1.unwrap_or(cfg.solver.step.c1());
        let c2 = args.c2.unwrap_or(cfg.solver.step.c2());
        cfg.solver.step = StepSchedule::new(c1, c2)?;
    }
    if args.zeta_min.is_some() || args.zeta_max.is_some() {
        let lo = args.zeta_min.unwrap_or(cfg.solver.spectral.lo());
        let hi = args.zeta_max.unwrap_or(cfg.solver.spectral.hi());
        cfg.solver.spectral = SpectralBounds::new(lo, hi)?;
    }
    if args.eta.is_some() || args.window.is_some() {
        let (eta0, c0) = match cfg.solver.mode {
            StepMode::LineSearch { eta, c } => (eta, c),
            StepMode::Predefined { .. } => match StepMode::line_search() {
                StepMode::LineSearch { eta, c } => (eta, c),
                StepMode::Predefined { .. } => unreachable!(),
            },
        };
        cfg.solver.mode = StepMode::LineSearch {
            eta: args.eta.unwrap_or(eta0),
            c: args.window.unwrap_or(c0),
        };
    }
    if let Some(scale) = args.step_scale {
        if cfg.method.line_search() {
            return Err(Error::config(format!(
                "--step-scale applies to predefined-step methods, not {}",
                cfg.method
            )));
        }
        cfg.solver.mode = StepMode::Predefined { scale };
    }
    if let Some(p) = args.y_policy {
        cfg.solver.y_policy = p.into();
    }
    if let Some(m) = args.max_iter {
        cfg.solver.max_iter = m;
    }
    if let Some(r) = args.reg_coeff {
        cfg.problem.reg_coeff = r;
    }
    if let Some(r) = args.radius_sq {
        cfg.region = FeasibleRegion::ball(r)?;
    }
    if args.no_descent_select {
        cfg.solver.descent_select = false;
    }
    // Bake the method into the stored solver section so the printed config
    // is exactly what runs.
    cfg.solver = cfg.effective_solver();
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs, seed_env: Option<&str>) -> std::result::Result<i32, Failure> {
    let cfg = resolve_run_config(&args, seed_env).map_err(invalid)?;
    let data = load_dataset(&args.problem).map_err(invalid)?;
    let data = match cfg.train_fraction {
        Some(f) => split(&data, f, cfg.split_seed).map_err(invalid)?.0,
        None => data,
    };
    let problem = HingeLossSvm::new(Arc::new(data), cfg.problem).map_err(invalid)?;
    let n_rows = problem.dataset().n_rows();
    let n_cols = problem.dataset().n_cols();
    let budget = cfg
        .budget
        .unwrap_or_else(|| (crate::bench::DEFAULT_BUDGET_FACTOR * n_rows as f64 * n_cols as f64).round() as u64);
    eprintln!("effective config: {}", serde_json::to_string(&cfg).expect("serializes"));
    eprintln!("budget: {budget}");

    let trace = run(&problem, &cfg.region, &cfg.solver, budget).map_err(runtime)?;

    let file = std::fs::File::create(&args.output)
        .map_err(|e| runtime(Error::config(format!("cannot create {}: {e}", args.output.display()))))?;
    let mut out = std::io::BufWriter::new(file);
    match args.format {
        TraceFormat::Csv => trace.write_csv(&mut out).map_err(runtime)?,
        TraceFormat::Json => {
            let text = trace.to_json().map_err(runtime)?;
            writeln!(out, "{text}").map_err(|e| runtime(e.into()))?;
        }
    }
    out.flush().map_err(|e| runtime(e.into()))?;

    let last = trace.last();
    let f_true = last.f_true.map(crate::solver::trace::fmt_real).unwrap_or_else(|| "NA".into());
    println!(
        "method={} k={} fev={} f_saa={} f_true={} termination={:?} trace={}",
        cfg.method,
        last.k,
        last.fev_cum,
        crate::solver::trace::fmt_real(last.f_saa),
        f_true,
        trace.termination,
        args.output.display()
    );
    Ok(0)
}

fn cmd_campaign(args: CampaignArgs) -> std::result::Result<i32, Failure> {
    let spec = CampaignSpec::from_path(&args.spec).map_err(invalid)?;
    spec.validate().map_err(invalid)?;
    let parallelism = match args.parallelism {
        Some(0) => return Err(invalid(Error::config("--parallelism must be >= 1"))),
        Some(p) => p,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    if args.out.exists() && !args.out.is_dir() {
        return Err(invalid(Error::config(format!(
            "output path {} exists and is not a directory",
            args.out.display()
        ))));
    }
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let datasets = spec.load_datasets(base).map_err(invalid)?;
    eprintln!("effective spec: {}", serde_json::to_string(&spec).expect("serializes"));

    let started = Instant::now();
    let result = run_campaign(&spec, &datasets, parallelism).map_err(|e| match e {
        e @ Error::Config(_) => invalid(e),
        e => runtime(e),
    })?;
    let meta = RunMeta {
        created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        elapsed_ms: started.elapsed().as_millis() as u64,
        parallelism,
    };
    write_outputs(&args.out, &result, meta).map_err(runtime)?;

    println!(
        "runs={} completed={} failed={} out={}",
        result.runs.len() * result.methods.len(),
        result.outcomes.len(),
        result.failures.len(),
        args.out.display()
    );
    for f in &result.failures {
        eprintln!("failed: {} seed {} {}: {}", f.dataset, f.seed, f.method, f.error);
    }
    Ok(if result.failures.is_empty() { 0 } else { 1 })
}

fn cmd_profile(args: ProfileArgs) -> std::result::Result<i32, Failure> {
    let doc = ResultsDocument::from_json(&read_text(&args.results, "results file").map_err(invalid)?)
        .map_err(invalid)?;
    let result = doc.deterministic;
    let tau = args.tau.unwrap_or(result.profile_tau);
    if !tau.is_finite() {
        return Err(invalid(Error::config("--tau must be finite")));
    }
    let q_grid = args.q_grid.clone().unwrap_or_else(|| result.q_grid.clone());
    // validates the grid before anything is written
    result.performance_profile(tau, &q_grid).map_err(|e| invalid(Error::config(e.to_string())))?;
    match &args.output {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| runtime(e.into()))?;
            write_profiles_csv(&result, tau, &q_grid, std::io::BufWriter::new(f)).map_err(runtime)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_profiles_csv(&result, tau, &q_grid, stdout.lock()).map_err(runtime)?;
        }
    }
    Ok(0)
}

fn cmd_inspect(args: InspectArgs) -> std::result::Result<i32, Failure> {
    let data = load_dataset(&args.problem).map_err(invalid)?;
    let n = data.n_rows();
    let pos = data.count_positive();
    let sym = data.symbols();
    println!("rows={n} cols={} nnz={}", data.n_cols(), data.nnz());
    println!(
        "labels: +1={pos} ({}) -1={} ({})",
        sym.positive.as_deref().unwrap_or("-"),
        n - pos,
        sym.negative.as_deref().unwrap_or("-")
    );
    println!("max_row_norm={}", crate::solver::trace::fmt_real(data.max_row_norm()));
    if let Some(f) = args.train_fraction {
        let (train, test) = split(&data, f, args.split_seed).map_err(invalid)?;
        println!("split: train={} test={}", train.n_rows(), test.n_rows());
    }
    Ok(0)
}
