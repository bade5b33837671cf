use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SampleSchedule, SpectralBounds, StepSchedule};

/// How `α_k` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepMode {
    /// `α_k = scale / k`; `scale` must lie in `[c1, c2]`.
    Predefined {
        #[serde(default = "one")]
        scale: f64,
    },
    /// Nonmonotone Armijo search over `{d_k, (d_k + 1/k)/2}`, else `1/k`.
    LineSearch { eta: f64, c: usize },
}

fn one() -> f64 {
    1.0
}

impl StepMode {
    pub fn harmonic() -> Self {
        StepMode::Predefined { scale: 1.0 }
    }

    pub fn line_search() -> Self {
        StepMode::LineSearch { eta: 1e-4, c: 5 }
    }
}

/// Which subgradient difference defines `y_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YkPolicy {
    /// `g_{N_k}(x_{k+1}) - ḡ_k`
    #[default]
    SameSample,
    /// `g_{N_{k+1}}(x_{k+1}) - ḡ_k`
    CrossSample,
    /// `g_{N_{k+1}}(x_{k+1}) - g_{N_{k+1}}(x_k)`
    NextSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleStrategy {
    /// `N_k = N` for every k.
    Full,
    /// `N_0 = ceil(initial_fraction N)`, `N_{k+1} = ceil(min(growth N_k, N))`.
    Geometric { initial_fraction: f64, growth: f64 },
}

impl SampleStrategy {
    pub fn schedule(&self, n: usize) -> Result<SampleSchedule> {
        match *self {
            SampleStrategy::Full => SampleSchedule::full(n),
            SampleStrategy::Geometric { initial_fraction, growth } => {
                SampleSchedule::from_fraction(initial_fraction, growth, n)
            }
        }
    }

    pub fn default_vss() -> Self {
        SampleStrategy::Geometric { initial_fraction: 0.1, growth: 1.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub step: StepSchedule,
    pub spectral: SpectralBounds,
    /// Initial spectral coefficient, clamped into `spectral`.
    pub zeta0: f64,
    pub mode: StepMode,
    pub y_policy: YkPolicy,
    pub sample: SampleStrategy,
    /// Ask the problem for a descent-preferring subgradient.
    pub descent_select: bool,
    /// Margin `m` of the descent test `sup ∂f·p <= -(m/2)||p||^2`.
    pub descent_margin: f64,
    /// Rescale each subgradient to unit norm before use.
    pub normalize_subgradient: bool,
    pub max_iter: u64,
    pub seed: u64,
    /// Record the full-sample objective `f(x_k)` (uncharged).
    pub track_true: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: StepSchedule::default(),
            spectral: SpectralBounds::default(),
            zeta0: 1.0,
            mode: StepMode::line_search(),
            y_policy: YkPolicy::SameSample,
            sample: SampleStrategy::default_vss(),
            descent_select: true,
            descent_margin: 1e-8,
            normalize_subgradient: false,
            max_iter: 1_000_000,
            seed: 0,
            track_true: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        // re-run the constructors' checks on deserialized values
        StepSchedule::new(self.step.c1(), self.step.c2())?;
        SpectralBounds::new(self.spectral.lo(), self.spectral.hi())?;
        if !(self.zeta0 > 0.0 && self.zeta0.is_finite()) {
            return Err(Error::config(format!("zeta0 must be finite and > 0, got {}", self.zeta0)));
        }
        match self.mode {
            StepMode::Predefined { scale } => {
                if !(scale >= self.step.c1() && scale <= self.step.c2()) {
                    return Err(Error::config(format!(
                        "predefined step scale {scale} outside [c1, c2] = [{}, {}]",
                        self.step.c1(),
                        self.step.c2()
                    )));
                }
            }
            StepMode::LineSearch { eta, c } => {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::config(format!("eta must lie in (0, 1), got {eta}")));
                }
                if c == 0 {
                    return Err(Error::config("nonmonotone window c must be >= 1"));
                }
            }
        }
        if let SampleStrategy::Geometric { initial_fraction, growth } = self.sample {
            if !(initial_fraction > 0.0 && initial_fraction <= 1.0) {
                return Err(Error::config(format!(
                    "initial sample fraction must lie in (0, 1], got {initial_fraction}"
                )));
            }
            if !(growth >= 1.0 && growth.is_finite()) {
                return Err(Error::config(format!("sample growth must be >= 1, got {growth}")));
            }
        }
        if !(self.descent_margin > 0.0 && self.descent_margin.is_finite()) {
            return Err(Error::config(format!(
                "descent margin must be finite and > 0, got {}",
                self.descent_margin
            )));
        }
        Ok(())
    }

    pub fn uses_spectral(&self) -> bool {
        self.spectral.lo() < self.spectral.hi()
    }
}

/// The named method variants compared in benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "sps")]
    Sps,
    #[serde(rename = "sps-f")]
    SpsF,
    #[serde(rename = "ls-sps")]
    LsSps,
    #[serde(rename = "ls-sps-f")]
    LsSpsF,
    #[serde(rename = "ls-ps")]
    LsPs,
    #[serde(rename = "ls-ps-f")]
    LsPsF,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Sps,
        Method::SpsF,
        Method::LsSps,
        Method::LsSpsF,
        Method::LsPs,
        Method::LsPsF,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Sps => "sps",
            Method::SpsF => "sps-f",
            Method::LsSps => "ls-sps",
            Method::LsSpsF => "ls-sps-f",
            Method::LsPs => "ls-ps",
            Method::LsPsF => "ls-ps-f",
        }
    }

    pub fn full_sample(&self) -> bool {
        matches!(self, Method::SpsF | Method::LsSpsF | Method::LsPsF)
    }

    pub fn line_search(&self) -> bool {
        !matches!(self, Method::Sps | Method::SpsF)
    }

    pub fn spectral(&self) -> bool {
        !matches!(self, Method::LsPs | Method::LsPsF)
    }

    /// Specialises `base` to this method. Base tunables (C1, C2, ζ bounds,
    /// η, c, VSS schedule) are kept where the method uses them.
    pub fn configure(&self, base: &SolverConfig) -> SolverConfig {
        let mut cfg = base.clone();
        cfg.sample = if self.full_sample() {
            SampleStrategy::Full
        } else {
            match base.sample {
                SampleStrategy::Full => SampleStrategy::default_vss(),
                vss => vss,
            }
        };
        cfg.mode = match (self.line_search(), base.mode) {
            (true, m @ StepMode::LineSearch { .. }) => m,
            (true, StepMode::Predefined { .. }) => StepMode::line_search(),
            (false, m @ StepMode::Predefined { .. }) => m,
            (false, StepMode::LineSearch { .. }) => StepMode::harmonic(),
        };
        if !self.spectral() {
            cfg.spectral = SpectralBounds::unit();
            cfg.zeta0 = 1.0;
        }
        cfg
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let valid: Vec<&str> = Method::ALL.iter().map(Method::name).collect();
                Error::config(format!("unknown method '{s}'; valid methods: {}", valid.join(", ")))
            })
    }
}
