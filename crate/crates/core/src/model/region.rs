use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Vector;

/// Relative slack used when checking feasibility of a projected point.
pub const FEASIBILITY_RTOL: f64 = 1e-12;

/// Closed convex feasible set with a closed-form Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleRegion {
    /// `{x : ||x||^2 <= radius_sq}`
    Ball { radius_sq: f64 },
    /// `{x : lower <= x <= upper}` componentwise.
    Box { lower: Vector, upper: Vector },
}

impl FeasibleRegion {
    pub fn ball(radius_sq: f64) -> Result<Self> {
        if !(radius_sq.is_finite() && radius_sq > 0.0) {
            return Err(Error::usage(format!(
                "ball radius_sq must be finite and > 0, got {radius_sq}"
            )));
        }
        Ok(FeasibleRegion::Ball { radius_sq })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        lower.check_dim(upper.dim())?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::usage(format!(
                "box bound {i} has lower {} > upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(FeasibleRegion::Box { lower, upper })
    }

    /// Interval `[-r, r]^dim`.
    pub fn symmetric_box(dim: usize, r: f64) -> Result<Self> {
        Self::boxed(Vector::new(vec![-r; dim])?, Vector::new(vec![r; dim])?)
    }

    /// Checks construction invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleRegion::Ball { radius_sq } => Self::ball(*radius_sq).map(|_| ()),
            FeasibleRegion::Box { lower, upper } => {
                Self::boxed(lower.clone(), upper.clone()).map(|_| ())
            }
        }
    }

    /// Fixed dimension of a box region; balls accept any dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleRegion::Ball { .. } => None,
            FeasibleRegion::Box { lower, .. } => Some(lower.dim()),
        }
    }

    /// Euclidean projection: the unique nearest point of the region.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        match self {
            FeasibleRegion::Ball { radius_sq } => {
                let nsq = x.norm_sq();
                if nsq <= *radius_sq {
                    return Ok(x.clone());
                }
                // nsq > radius_sq > 0, so the norm is nonzero here.
                let factor = (radius_sq / nsq).sqrt();
                let mut y = x.scale(factor)?;
                // Rounding in the scale can leave ||y||^2 a few ulps outside.
                while y.norm_sq() > *radius_sq {
                    y = y.scale(1.0 - f64::EPSILON)?;
                }
                Ok(y)
            }
            FeasibleRegion::Box { lower, upper } => {
                x.check_dim(lower.dim())?;
                Ok(Vector::from_finite(
                    (0..x.dim())
                        .map(|i| x[i].clamp(lower[i], upper[i]))
                        .collect(),
                ))
            }
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            FeasibleRegion::Ball { radius_sq } => {
                x.norm_sq() <= radius_sq * (1.0 + FEASIBILITY_RTOL)
            }
            FeasibleRegion::Box { lower, upper } => {
                x.dim() == lower.dim()
                    && (0..x.dim()).all(|i| {
                        let slack = FEASIBILITY_RTOL * (1.0 + lower[i].abs().max(upper[i].abs()));
                        x[i] >= lower[i] - slack && x[i] <= upper[i] + slack
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn feasible_point_unchanged() {
        let ball = FeasibleRegion::ball(0.1).unwrap();
        let x = v(&[0.1_f64.sqrt(), 0.0]);
        assert_eq!(ball.project(&x).unwrap(), x);
    }

    #[test]
    fn ball_scales_to_boundary() {
        let ball = FeasibleRegion::ball(0.1).unwrap();
        let p = ball.project(&v(&[1.0, 0.0, 0.0])).unwrap();
        assert!((p[0] - 0.1_f64.sqrt()).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn ball_projection_matches_grid_search_on_circle() {
        // Nearest point on the sphere ||y||^2 = 0.1 in n=2 by brute force.
        let ball = FeasibleRegion::ball(0.1).unwrap();
        let x = v(&[1.0, 0.0]);
        let r = 0.1_f64.sqrt();
        let steps = 200_000;
        let best = (0..steps)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
                let y = [r * t.cos(), r * t.sin()];
                ((y[0] - 1.0).powi(2) + y[1].powi(2), y)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1;
        let p = ball.project(&x).unwrap();
        assert!((p[0] - best[0]).abs() < 1e-9);
        assert!((p[1] - best[1]).abs() < 1e-9);
    }

    #[test]
    fn box_clamps() {
        let region = FeasibleRegion::boxed(v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(region.project(&v(&[-3.0, 0.5, 7.0])).unwrap(), v(&[0.0, 0.5, 1.0]));
    }

    #[test]
    fn box_dimension_mismatch() {
        let region = FeasibleRegion::symmetric_box(2, 1.0).unwrap();
        assert!(matches!(region.project(&v(&[1.0])), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_construction() {
        assert!(FeasibleRegion::ball(0.0).is_err());
        assert!(FeasibleRegion::ball(-1.0).is_err());
        assert!(FeasibleRegion::ball(f64::NAN).is_err());
        assert!(FeasibleRegion::boxed(v(&[1.0]), v(&[0.0])).is_err());
    }

    fn regions() -> impl Strategy<Value = FeasibleRegion> {
        prop_oneof![
            (1e-3f64..10.0).prop_map(|r| FeasibleRegion::ball(r).unwrap()),
            prop::collection::vec((-5.0f64..5.0, 0.0f64..3.0), 3).prop_map(|b| {
                let lo: Vec<f64> = b.iter().map(|p| p.0).collect();
                let hi: Vec<f64> = b.iter().map(|p| p.0 + p.1).collect();
                FeasibleRegion::boxed(v(&lo), v(&hi)).unwrap()
            }),
        ]
    }

    fn points() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-1e3f64..1e3, 3).prop_map(|c| v(&c))
    }

    proptest! {
        #[test]
        fn nonexpansive(region in regions(), x in points(), y in points()) {
            let px = region.project(&x).unwrap();
            let py = region.project(&y).unwrap();
            prop_assert!(px.dist_sq(&py).sqrt() <= x.dist_sq(&y).sqrt() * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn idempotent_and_feasible(region in regions(), x in points()) {
            let p = region.project(&x).unwrap();
            prop_assert!(region.contains(&p));
            let pp = region.project(&p).unwrap();
            prop_assert_eq!(pp, p);
        }
    }
}
