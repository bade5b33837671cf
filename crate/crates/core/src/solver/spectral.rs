use crate::model::{SpectralBounds, Vector};

/// Safeguarded spectral coefficient `clamp(sᵀs / sᵀy, lo, hi)`.
///
/// Negative curvature (`sᵀy < 0`) yields `lo`. Zero curvature, including a
/// subgradient that did not change along the step, is the `sᵀy -> 0+` limit
/// and yields `hi`, as does an overflowing ratio. A zero step carries no
/// curvature information and keeps `previous`, clamped.
pub fn spectral_update(s: &Vector, y: &Vector, bounds: &SpectralBounds, previous: f64) -> f64 {
    assert_eq!(s.dim(), y.dim(), "spectral update on vectors of different dimension");
    let ss = s.norm_sq();
    if ss == 0.0 {
        return bounds.clamp(previous);
    }
    let sy = s.dot(y);
    if sy < 0.0 {
        return bounds.lo();
    }
    if sy == 0.0 {
        return bounds.hi();
    }
    // may overflow to +inf, which clamps to hi
    bounds.clamp(ss / sy)
}
