//! De Finetti's dividend problem: barrier values, the HJB residuals of the
//! candidate `v_{a*}`, and a verdict on its optimality.

mod generator;
mod solve;

pub use generator::{generator_apply, split_point, Analytic, GeneratorValue, TestFunction};
pub use solve::{solve, BarrierSolution, SolveOptions, Verdict, CONDITION_TOL, NEAR_A_STAR};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::levy::LevyModel;
use crate::numeric::quad::Quad;
use crate::scale::ScaleGrid;

/// Relative HJB tolerance: residuals are compared with `5e-4·q·v(x)`.
pub const HJB_REL_TOL: f64 = 5e-4;

/// `v_a` for a barrier at `a`:
/// `W(x)/W'(a)` below the barrier, `x - a + W(a)/W'(a)` above it.
#[derive(Debug, Clone, Copy)]
pub struct BarrierValue<'a> {
    scale: &'a ScaleGrid,
    a: f64,
    wa: f64,
    w1a: f64,
}

impl<'a> BarrierValue<'a> {
    pub fn new(scale: &'a ScaleGrid, a: f64) -> Result<Self> {
        if !(a > 0.0) || a > scale.x_max() {
            return Err(Error::Range {
                x: a,
                max: scale.x_max(),
            });
        }
        let (wa, w1a) = scale.evaluate(a)?;
        let w1a = w1a.ok_or_else(|| Error::Domain(format!("W' is not defined at a = {a}")))?;
        if !(w1a > 0.0) {
            return Err(Error::Domain(format!("W'(a) must be positive, got {w1a} at a = {a}")));
        }
        Ok(BarrierValue { scale, a, wa, w1a })
    }

    pub fn barrier(&self) -> f64 {
        self.a
    }

    /// `v_a(a) = W(a)/W'(a)`.
    pub fn at_barrier(&self) -> f64 {
        self.wa / self.w1a
    }
}

impl TestFunction for BarrierValue<'_> {
    fn value(&self, x: f64) -> Result<f64> {
        if x <= self.a {
            Ok(self.scale.w_at(x)? / self.w1a)
        } else {
            Ok(x - self.a + self.at_barrier())
        }
    }

    fn d1(&self, x: f64) -> Result<f64> {
        if x <= self.a {
            Ok(self.scale.w1_at(x)? / self.w1a)
        } else {
            Ok(1.0)
        }
    }

    fn d2(&self, x: f64) -> Result<f64> {
        if x < self.a {
            Ok(self.scale.w2_at(x)? / self.w1a)
        } else {
            Ok(0.0)
        }
    }

    fn breaks(&self) -> Vec<f64> {
        vec![self.a]
    }
}

/// `v_a(x)`; zero for `x < 0`.
pub fn barrier_value(scale: &ScaleGrid, a: f64, x: f64) -> Result<f64> {
    BarrierValue::new(scale, a)?.value(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    Exterior,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Interior => "interior",
            Region::Exterior => "exterior",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HjbPoint {
    pub x: f64,
    pub region: Region,
    /// `(Γ - q)v_a(x)`.
    pub residual: f64,
    pub v: f64,
    /// `rel_tol·q·v(x)`.
    pub tolerance: f64,
}

impl HjbPoint {
    /// Interior points need `|r| ≤ tol`, exterior ones `r ≤ tol`.
    pub fn within(&self, factor: f64) -> bool {
        let t = factor * self.tolerance;
        match self.region {
            Region::Interior => self.residual.abs() <= t,
            Region::Exterior => self.residual <= t,
        }
    }
}

/// `(Γ - q)v_a` at each point of `xs` (all `> 0`), with tolerance
/// `rel_tol·q·v(x)` attached.
pub fn hjb_residual(
    model: &LevyModel,
    scale: &ScaleGrid,
    a: f64,
    xs: &[f64],
    rel_tol: f64,
    exec: Exec,
) -> Result<Vec<HjbPoint>> {
    let v = BarrierValue::new(scale, a)?;
    let quad = Quad::default();
    let q = scale.q;
    exec.try_map(xs.len(), |i| {
        let x = xs[i];
        let g = generator_apply(model, &v, x, &quad)?;
        let vx = v.value(x)?;
        Ok(HjbPoint {
            x,
            region: if x < a { Region::Interior } else { Region::Exterior },
            residual: g.value - q * vx,
            v: vx,
            tolerance: rel_tol * q * vx,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::ScaleOptions;

    #[test]
    fn branches_meet_at_the_barrier() {
        let m = LevyModel::brownian(0.0, 1.0).unwrap();
        let s = ScaleGrid::compute(&m, 0.1, &ScaleOptions::default()).unwrap();
        let v = BarrierValue::new(&s, 1.0).unwrap();
        let below = s.w_at(1.0).unwrap() / s.w1_at(1.0).unwrap();
        assert!((v.value(1.0).unwrap() - below).abs() < 1e-14);
        assert!((v.value(1.0 + 1e-9).unwrap() - below - 1e-9).abs() < 1e-14);
        assert_eq!(v.d1(2.0).unwrap(), 1.0);
        assert_eq!(v.value(-0.5).unwrap(), 0.0);
        assert!(matches!(BarrierValue::new(&s, 11.0), Err(Error::Range { .. })));
    }
}
