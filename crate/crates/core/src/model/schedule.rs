use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ceiling that forgives floating-point noise just above an integer, so that
/// e.g. `1.1 * 100` maps to 110 rather than 111.
pub fn robust_ceil(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        t.ceil()
    }
}

/// Step-size interval constants: α_k ∈ [c1/k, c2/k].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepScheduleRaw")]
pub struct StepSchedule {
    c1: f64,
    c2: f64,
}

#[derive(Deserialize)]
struct StepScheduleRaw {
    c1: f64,
    c2: f64,
}

impl TryFrom<StepScheduleRaw> for StepSchedule {
    type Error = Error;

    fn try_from(raw: StepScheduleRaw) -> Result<Self> {
        StepSchedule::new(raw.c1, raw.c2)
    }
}

impl StepSchedule {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1 < 1.0 && c2 > 1.0 && c2.is_finite()) {
            return Err(Error::usage(format!(
                "step schedule needs 0 < c1 < 1 < c2 < inf, got c1={c1}, c2={c2}"
            )));
        }
        Ok(StepSchedule { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `(c1/k, c2/k)` for the 1-based iteration counter `k`.
    pub fn interval(&self, k: u64) -> Result<(f64, f64)> {
        if k == 0 {
            return Err(Error::usage("step interval counter is 1-based; k = 0 given"));
        }
        let k = k as f64;
        Ok((self.c1 / k, self.c2 / k))
    }

    pub fn contains(&self, k: u64, alpha: f64) -> bool {
        match self.interval(k) {
            Ok((lo, hi)) => alpha >= lo && alpha <= hi,
            Err(_) => false,
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule { c1: 1e-2, c2: 1e2 }
    }
}

/// Safeguard interval for the spectral coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralBoundsRaw")]
pub struct SpectralBounds {
    zeta_lo: f64,
    zeta_hi: f64,
}

#[derive(Deserialize)]
struct SpectralBoundsRaw {
    zeta_lo: f64,
    zeta_hi: f64,
}

impl TryFrom<SpectralBoundsRaw> for SpectralBounds {
    type Error = Error;

    fn try_from(raw: SpectralBoundsRaw) -> Result<Self> {
        SpectralBounds::new(raw.zeta_lo, raw.zeta_hi)
    }
}

impl SpectralBounds {
    pub fn new(zeta_lo: f64, zeta_hi: f64) -> Result<Self> {
        if !(zeta_lo > 0.0 && zeta_lo <= zeta_hi && zeta_hi.is_finite()) {
            return Err(Error::usage(format!(
                "spectral bounds need 0 < lo <= hi < inf, got lo={zeta_lo}, hi={zeta_hi}"
            )));
        }
        Ok(SpectralBounds { zeta_lo, zeta_hi })
    }

    /// Degenerate bounds `lo = hi = 1`: plain projected subgradient.
    pub fn unit() -> Self {
        SpectralBounds { zeta_lo: 1.0, zeta_hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.zeta_lo
    }

    pub fn hi(&self) -> f64 {
        self.zeta_hi
    }

    pub fn clamp(&self, z: f64) -> f64 {
        z.max(self.zeta_lo).min(self.zeta_hi)
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.zeta_lo && z <= self.zeta_hi
    }
}

impl Default for SpectralBounds {
    fn default() -> Self {
        SpectralBounds { zeta_lo: 1e-4, zeta_hi: 1e4 }
    }
}

/// Geometric sample-size schedule `N_{k+1} = ceil(min(growth * N_k, n_max))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSchedule {
    n0: usize,
    growth: f64,
    n_max: usize,
}

impl SampleSchedule {
    pub fn new(n0: usize, growth: f64, n_max: usize) -> Result<Self> {
        if n0 == 0 || n0 > n_max {
            return Err(Error::usage(format!(
                "sample schedule needs 1 <= n0 <= n_max, got n0={n0}, n_max={n_max}"
            )));
        }
        if !(growth >= 1.0 && growth.is_finite()) {
            return Err(Error::usage(format!("sample growth must be >= 1, got {growth}")));
        }
        Ok(SampleSchedule { n0, growth, n_max })
    }

    /// Starts at `ceil(fraction * n_max)`, clamped to at least one sample.
    pub fn from_fraction(fraction: f64, growth: f64, n_max: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::usage(format!(
                "initial sample fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let n0 = (robust_ceil(fraction * n_max as f64) as usize).max(1);
        Self::new(n0, growth, n_max)
    }

    /// Every iteration uses all `n_max` samples.
    pub fn full(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1.0, n_max)
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn next(&self, n_k: usize) -> Result<usize> {
        if n_k < self.n0 || n_k > self.n_max {
            return Err(Error::usage(format!(
                "sample size {n_k} outside [{}, {}]",
                self.n0, self.n_max
            )));
        }
        let grown = (self.growth * n_k as f64).min(self.n_max as f64);
        Ok((robust_ceil(grown) as usize).clamp(n_k, self.n_max))
    }
}

/// Seeded permutation of `0..N` whose prefixes realise nested samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePermutation {
    order: Vec<usize>,
}

impl SamplePermutation {
    pub fn seeded(n: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        SamplePermutation { order }
    }

    pub fn from_order(order: Vec<usize>) -> Self {
        SamplePermutation { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// First `n_k` entries of the permutation.
    pub fn prefix(&self, n_k: usize) -> Result<&[usize]> {
        nested_index_set(&self.order, n_k)
    }
}

pub fn nested_index_set(permutation: &[usize], n_k: usize) -> Result<&[usize]> {
    if n_k > permutation.len() {
        return Err(Error::usage(format!(
            "sample size {n_k} exceeds ground set size {}",
            permutation.len()
        )));
    }
    Ok(&permutation[..n_k])
}
