//! The shape conclusions that log-convexity of the jump structure implies,
//! checked on computed grids.

use super::astar::{find_a_star, AStar};
use super::conjugate::conjugate_tail;
use super::grid::{convexity_report, monotonicity_report, SECOND_DIFF_TOL};
use super::smoothness::{certify_jumps, smoothness_class, JumpCertificates, Smoothness};
use super::{Property, ShapeReport};
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::scale::ScaleGrid;

/// Offset to the right of `a*` for the convexity window.
pub const A_STAR_OFFSET: f64 = 0.05;
/// Relative accuracy assumed for inverted values when trimming the window
/// in which `u_q` is resolved.
const INVERSION_EPS: f64 = 1e-10;
/// Default second-difference tolerance for `W'` and `u_q`.
pub const DERIVATIVE_TOL: f64 = 1e-7;

/// Second-difference tolerances for value-level and derivative-level data.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShapeTolerances {
    pub second_diff: f64,
    pub derivative: f64,
}

impl Default for ShapeTolerances {
    fn default() -> Self {
        ShapeTolerances {
            second_diff: SECOND_DIFF_TOL,
            derivative: DERIVATIVE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShapeSuite {
    pub q: f64,
    pub a_star: Option<AStar>,
    pub certificates: JumpCertificates,
    pub smoothness: Smoothness,
    /// Conclusions whose hypotheses were certified; all must pass.
    pub conclusions: Vec<(String, ShapeReport)>,
    /// Reported shapes with no claim attached.
    pub observations: Vec<(String, ShapeReport)>,
    pub skipped: Vec<String>,
}

impl ShapeSuite {
    pub fn pass(&self) -> bool {
        self.conclusions.iter().all(|(_, r)| r.pass)
    }

    pub fn conclusion(&self, name: &str) -> Option<&ShapeReport> {
        self.conclusions.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }
}

/// Last index up to which `u_q` stands well above its inversion noise.
fn resolved_end(scale: &ScaleGrid) -> usize {
    let mut end = 0;
    for i in 0..scale.xs.len() {
        let noise = INVERSION_EPS * (scale.w1[i].abs() + scale.phi_q * scale.w[i].abs());
        if scale.u_q[i].abs() > 1e4 * noise {
            end = i;
        } else {
            break;
        }
    }
    end
}

/// Runs the certificates and every conclusion they license.
/// `scale_q` is the grid at the discount rate of interest; `scale_0`, if
/// given, is the 0-scale grid used for the `q = 0` statements.
pub fn shape_suite(
    model: &LevyModel,
    scale_q: &ScaleGrid,
    scale_0: Option<&ScaleGrid>,
    tol: &ShapeTolerances,
) -> Result<ShapeSuite> {
    let certificates = certify_jumps(model)?;
    let smoothness = smoothness_class(model)?;
    let mut suite = ShapeSuite {
        q: scale_q.q,
        a_star: None,
        certificates,
        smoothness,
        conclusions: Vec::new(),
        observations: Vec::new(),
        skipped: Vec::new(),
    };
    let s = scale_q;
    let full = (s.xs[0], s.x_max());

    if s.q > 0.0 {
        let a = find_a_star(s)?;
        suite.a_star = Some(a);
        let window = (a.value + A_STAR_OFFSET, s.x_max());
        if suite.certificates.density_log_convex() {
            suite.conclusions.push((
                "g_q concave".into(),
                convexity_report(&s.xs, &s.g, full, Property::Concave, tol.second_diff),
            ));
            suite.conclusions.push((
                "W convex beyond a*".into(),
                convexity_report(&s.xs, &s.w, window, Property::Convex, tol.second_diff),
            ));
            suite.conclusions.push((
                "W' convex beyond a*".into(),
                convexity_report(&s.xs, &s.w1, window, Property::Convex, tol.derivative),
            ));
            suite.conclusions.push((
                "W strictly convex beyond a*".into(),
                convexity_report(&s.xs, &s.w, window, Property::StrictlyConvex, tol.second_diff),
            ));
            suite.conclusions.push((
                "W' strictly convex beyond a*".into(),
                convexity_report(&s.xs, &s.w1, window, Property::StrictlyConvex, tol.second_diff),
            ));
            let end = resolved_end(s);
            let u_window = (s.xs[0], s.xs[end]);
            let note = format!(
                "u_q resolved above inversion noise on [{:.4}, {:.4}]",
                u_window.0, u_window.1
            );
            suite.conclusions.push((
                "u_q non-increasing".into(),
                monotonicity_report(&s.xs, &s.u_q, u_window, Property::NonIncreasing, tol.derivative)
                    .with_note(note.clone()),
            ));
            suite.conclusions.push((
                "u_q convex".into(),
                convexity_report(&s.xs, &s.u_q, u_window, Property::Convex, tol.derivative).with_note(note),
            ));
        } else {
            suite
                .skipped
                .push("log-convexity of π not certified: no conclusions about g_q, W, W', u_q".into());
        }
        if a.value > 2.0 * s.xs[0] {
            suite.observations.push((
                "W concave below a*".into(),
                convexity_report(&s.xs, &s.w, (s.xs[0], a.value), Property::Concave, tol.second_diff),
            ));
        }
    } else {
        suite
            .skipped
            .push("q = 0: a* and the q > 0 conclusions are not defined".into());
    }

    if let Some(z) = scale_0.or(if s.q == 0.0 { Some(s) } else { None }) {
        if z.q != 0.0 {
            return Err(Error::Precondition("scale_0 must be a 0-scale grid".into()));
        }
        let zfull = (z.xs[0], z.x_max());
        if z.phi_q == 0.0 {
            if suite.certificates.upsilon_log_convex() {
                suite.conclusions.push((
                    "W concave (q = 0)".into(),
                    convexity_report(&z.xs, &z.w, zfull, Property::Concave, tol.second_diff),
                ));
            } else {
                suite
                    .skipped
                    .push("log-convexity of Ῡ not certified: W concavity at q = 0 not asserted".into());
            }
            if suite.certificates.tail_log_convex() {
                suite.conclusions.push((
                    "W' convex (q = 0)".into(),
                    convexity_report(&z.xs, &z.w1, zfull, Property::Convex, tol.derivative),
                ));
                let ct = conjugate_tail(z, suite.certificates.tail.as_ref())?;
                suite.conclusions.push((
                    "conjugate tail non-increasing".into(),
                    ct.non_increasing.with_note(ct.bias_note.clone()),
                ));
                suite
                    .conclusions
                    .push(("conjugate tail non-negative".into(), ct.non_negative));
            } else {
                suite
                    .skipped
                    .push("log-convexity of Π̄ not certified: W' convexity at q = 0 not asserted".into());
            }
        } else {
            suite
                .skipped
                .push("Φ(0) > 0: the q = 0 statements need Φ(0) = 0".into());
        }
    }
    Ok(suite)
}
