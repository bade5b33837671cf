//! FEV accounting. One unit is one scalar product `x·w_i`.

use serde::{Deserialize, Serialize};

/// Kinds of oracle work the solver performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Charge {
    /// SAA value `f_S(x)` used by the algorithm (line-search reference).
    Value,
    /// Subgradient `g ∈ ∂f_S(x)`.
    Subgradient,
    /// SAA value at a line-search trial point.
    LineSearchTrial,
    /// Subgradient reused from the previous iteration's cache.
    CachedReuse,
}

/// Units charged for a call on an index set of size `sample_len`.
pub fn units(charge: Charge, sample_len: usize) -> u64 {
    match charge {
        Charge::Value | Charge::Subgradient | Charge::LineSearchTrial => sample_len as u64,
        Charge::CachedReuse => 0,
    }
}

/// The budget would be exceeded by the requested charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExhausted;

/// Per-kind call and unit totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FevBreakdown {
    pub value_units: u64,
    pub subgradient_units: u64,
    pub trial_units: u64,
    pub value_calls: u64,
    pub subgradient_calls: u64,
    pub trial_calls: u64,
    pub cached_reuses: u64,
}

impl FevBreakdown {
    pub fn total(&self) -> u64 {
        self.value_units + self.subgradient_units + self.trial_units
    }
}

/// Budgeted FEV counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FevMeter {
    budget: u64,
    breakdown: FevBreakdown,
}

impl FevMeter {
    pub fn new(budget: u64) -> Self {
        FevMeter { budget, breakdown: FevBreakdown::default() }
    }

    pub fn used(&self) -> u64 {
        self.breakdown.total()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn breakdown(&self) -> FevBreakdown {
        self.breakdown
    }

    /// Records `charge` on a sample of `sample_len`, refusing if the budget
    /// would be exceeded. A refused charge leaves the meter unchanged.
    pub fn charge(&mut self, charge: Charge, sample_len: usize) -> Result<(), BudgetExhausted> {
        let u = units(charge, sample_len);
        if self.used().saturating_add(u) > self.budget {
            return Err(BudgetExhausted);
        }
        let b = &mut self.breakdown;
        match charge {
            Charge::Value => {
                b.value_units += u;
                b.value_calls += 1;
            }
            Charge::Subgradient => {
                b.subgradient_units += u;
                b.subgradient_calls += 1;
            }
            Charge::LineSearchTrial => {
                b.trial_units += u;
                b.trial_calls += 1;
            }
            Charge::CachedReuse => b.cached_reuses += 1,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_over_budget_without_side_effects() {
        let mut m = FevMeter::new(10);
        m.charge(Charge::Subgradient, 6).unwrap();
        assert_eq!(m.charge(Charge::Value, 5), Err(BudgetExhausted));
        assert_eq!(m.used(), 6);
        m.charge(Charge::LineSearchTrial, 4).unwrap();
        assert_eq!(m.used(), 10);
        m.charge(Charge::CachedReuse, 100).unwrap();
        assert_eq!(m.used(), 10);
        assert_eq!(m.breakdown().cached_reuses, 1);
    }

    #[test]
    fn zero_budget_admits_only_free_work() {
        let mut m = FevMeter::new(0);
        assert!(m.charge(Charge::Subgradient, 1).is_err());
        assert!(m.charge(Charge::CachedReuse, 1).is_ok());
    }
}
