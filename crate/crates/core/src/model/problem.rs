use crate::error::Result;
use crate::model::Vector;

/// Request for a descent-preferring subgradient selection at a point.
///
/// The selector looks for `g` in the subdifferential such that the direction
/// `p = -zeta * g` satisfies `sup_{h in ∂f(x)} h·p <= -(margin / 2) ||p||^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentHint {
    pub zeta: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub g: Vector,
    /// `Some(true)` when a hinted selection certified the descent test,
    /// `None` when no hint was given or the problem cannot check it.
    pub descent_certified: Option<bool>,
}

/// A finite-sum objective `f_S(x) = (1/|S|) Σ_{i∈S} f_i(x)` over index sets
/// `S ⊆ {0, .., N-1}` of the ground set.
///
/// Implementations must be convex in `x` for every index set and return true
/// subgradients. Each call is charged `|S|` FEV units by the solver's meter.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    /// Size `N` of the ground set.
    fn ground_size(&self) -> usize;

    fn value(&self, x: &Vector, idx: &[usize]) -> Result<f64>;

    fn subgradient(
        &self,
        x: &Vector,
        idx: &[usize],
        hint: Option<DescentHint>,
    ) -> Result<Subgradient>;

    /// Full-sample objective `f(x)`.
    fn full_value(&self, x: &Vector) -> Result<f64> {
        let all: Vec<usize> = (0..self.ground_size()).collect();
        self.value(x, &all)
    }
}
