//! The full pipeline from a model to a verdict on the barrier at `a*`.

use std::io::Write;

use super::{hjb_residual, BarrierValue, HjbPoint, TestFunction, HJB_REL_TOL};
use crate::error::{Error, Result};
use crate::levy::{JumpKind, LevyModel};
use crate::scale::{ScaleGrid, ScaleOptions};
use crate::shape::{certify_jumps, find_a_star, monotonicity_report, AStar, Property, ShapeReport};

/// Relative tolerance on decreases of `W'` beyond `a*`.
pub const CONDITION_TOL: f64 = 1e-8;
/// Positive exterior residuals up to twice the tolerance are only flagged
/// when they sit this close to `a*`.
pub const NEAR_A_STAR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OptimalCertified,
    ConditionViolated,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::OptimalCertified => 0,
            Verdict::ConditionViolated => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::OptimalCertified => "optimal_certified",
            Verdict::ConditionViolated => "condition_violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub scale: ScaleOptions,
    /// Spacing of the residual grid is `x_max / hjb_points`.
    pub hjb_points: usize,
    /// Distance kept from `0` and from `a*` by the residual windows.
    pub edge: f64,
    pub max_extensions: usize,
    /// HJB tolerance relative to `q·v(x)`.
    pub hjb_rel: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            scale: ScaleOptions::default(),
            hjb_points: 200,
            edge: 0.05,
            max_extensions: 4,
            hjb_rel: HJB_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BarrierSolution {
    pub q: f64,
    pub a_star: AStar,
    pub x_max: f64,
    /// Number of times the grid was doubled to localise `a*`.
    pub extensions: usize,
    pub method: String,
    pub hjb_rel: f64,
    pub xs: Vec<f64>,
    pub value: Vec<f64>,
    pub value_d1: Vec<f64>,
    pub hjb_interior: Vec<HjbPoint>,
    pub hjb_exterior: Vec<HjbPoint>,
    /// Exterior points above tolerance but within twice it, close to `a*`.
    pub flagged: Vec<f64>,
    /// `W'` non-decreasing on `(a*, x_max)`.
    pub convexity_cert: ShapeReport,
    pub density_cert: Option<ShapeReport>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

impl BarrierSolution {
    pub fn max_interior_ratio(&self) -> f64 {
        ratio(&self.hjb_interior, |p| p.residual.abs())
    }

    pub fn max_exterior_ratio(&self) -> f64 {
        ratio(&self.hjb_exterior, |p| p.residual)
    }

    pub fn min_slope(&self) -> f64 {
        self.value_d1.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `x,v,v1` with a comment header.
    pub fn write_value_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# q={},a_star={:.16e},verdict={}",
            self.q, self.a_star.value, self.verdict
        )?;
        writeln!(out, "x,v,v1")?;
        for i in 0..self.xs.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.xs[i], self.value[i], self.value_d1[i]
            )?;
        }
        Ok(())
    }

    /// `x,region,residual,tolerance,v`.
    pub fn write_residual_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# q={},a_star={:.16e},rel_tol={}",
            self.q, self.a_star.value, self.hjb_rel
        )?;
        writeln!(out, "x,region,residual,tolerance,v")?;
        for p in self.hjb_interior.iter().chain(&self.hjb_exterior) {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e}",
                p.x, p.region, p.residual, p.tolerance, p.v
            )?;
        }
        Ok(())
    }
}

/// Largest `measure(p)/tolerance(p)`; 0 when there are no points.
fn ratio(points: &[HjbPoint], measure: impl Fn(&HjbPoint) -> f64) -> f64 {
    points.iter().map(|p| measure(p) / p.tolerance).fold(0.0, f64::max)
}

fn uniform_in(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(hi > lo) {
        return Vec::new();
    }
    let mut xs = vec![lo];
    let mut k = (lo / step).floor() as i64 + 1;
    while (k as f64) * step < hi {
        xs.push(k as f64 * step);
        k += 1;
    }
    xs.push(hi);
    xs.dedup();
    xs
}

/// Scale grid on a domain that is doubled until `a*` is localised with
/// margin, at most `max_extensions` times.
fn localise(model: &LevyModel, q: f64, opts: &SolveOptions) -> Result<(ScaleGrid, AStar, usize)> {
    let mut scale_opts = opts.scale;
    let mut ext = 0;
    loop {
        let scale = ScaleGrid::compute(model, q, &scale_opts).map_err(|e| e.at_stage("compute_scale"))?;
        match find_a_star(&scale) {
            Ok(a) if a.margin_ok || ext == opts.max_extensions => return Ok((scale, a, ext)),
            Err(Error::NotLocalized { x_max }) if ext == opts.max_extensions => {
                return Err(Error::NotLocalized { x_max }.at_stage("find_a_star"))
            }
            Ok(_) | Err(Error::NotLocalized { .. }) => {}
            Err(e) => return Err(e.at_stage("find_a_star")),
        }
        scale_opts.grid = scale_opts.grid.with_x_max(2.0 * scale_opts.grid.x_max);
        ext += 1;
    }
}

/// Computes `W^{(q)}`, locates `a*`, certifies condition 1.3 and the
/// log-convexity of `π`, and checks the HJB residuals of `v_{a*}`.
pub fn solve(model: &LevyModel, q: f64, opts: &SolveOptions) -> Result<BarrierSolution> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("solve needs q > 0, got {q}")));
    }
    if model.jumps().kind() == JumpKind::Atoms {
        return Err(Error::Precondition("solve needs a jump measure with a density".into()));
    }
    let exec = opts.scale.exec;
    let (scale, a_star, extensions) = localise(model, q, opts)?;
    let a = a_star.value;
    let x_max = scale.x_max();

    let certs = certify_jumps(model).map_err(|e| e.at_stage("certify"))?;
    let convexity_cert = monotonicity_report(&scale.xs, &scale.w1, (a, x_max), Property::NonDecreasing, CONDITION_TOL)
        .with_note(format!("W' non-decreasing certified on [{a:.6}, {x_max}] only"));

    let barrier = if a > 0.0 { a } else { scale.xs[0] };
    let v = BarrierValue::new(&scale, barrier).map_err(|e| e.at_stage("barrier_value"))?;
    let mut xs = vec![0.0];
    xs.extend_from_slice(&scale.xs);
    let value: Vec<f64> = xs
        .iter()
        .map(|&x| v.value(x))
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("barrier_value"))?;
    let value_d1: Vec<f64> = xs
        .iter()
        .map(|&x| if x == 0.0 { v.d1(scale.xs[0]) } else { v.d1(x) })
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("barrier_value"))?;

    let step = x_max / opts.hjb_points as f64;
    let interior = uniform_in(opts.edge, a - opts.edge, step);
    let exterior = uniform_in(a + opts.edge, x_max, step);
    let hjb_interior =
        hjb_residual(model, &scale, barrier, &interior, opts.hjb_rel, exec).map_err(|e| e.at_stage("hjb_residual"))?;
    let hjb_exterior =
        hjb_residual(model, &scale, barrier, &exterior, opts.hjb_rel, exec).map_err(|e| e.at_stage("hjb_residual"))?;

    let mut reasons = Vec::new();
    let density_ok = certs.density_log_convex();
    if !density_ok {
        reasons.push("log-convexity of π not certified".to_string());
    }
    if !convexity_cert.pass {
        reasons.push(format!(
            "W' decreases beyond a* (worst {:.3e} at x = {:.6})",
            convexity_cert.worst_violation, convexity_cert.location
        ));
    }
    if !a_star.margin_ok {
        reasons.push(format!("W'(x_max) < 1.1·min W' after {extensions} extensions"));
    }
    let interior_bad: Vec<&HjbPoint> = hjb_interior.iter().filter(|p| !p.within(1.0)).collect();
    if let Some(p) = interior_bad.first() {
        reasons.push(format!(
            "{} interior HJB residuals above tolerance (first at x = {:.6}: {:.3e})",
            interior_bad.len(),
            p.x,
            p.residual
        ));
    }
    let mut flagged = Vec::new();
    let mut exterior_bad = 0;
    for p in &hjb_exterior {
        if p.within(1.0) {
            continue;
        }
        if p.within(2.0) && p.x - a <= NEAR_A_STAR {
            flagged.push(p.x);
        } else {
            exterior_bad += 1;
        }
    }
    if exterior_bad > 0 {
        reasons.push(format!("{exterior_bad} exterior HJB residuals above tolerance"));
    }

    let verdict = if !convexity_cert.pass {
        Verdict::ConditionViolated
    } else if density_ok && a_star.margin_ok && interior_bad.is_empty() && exterior_bad == 0 {
        Verdict::OptimalCertified
    } else {
        Verdict::Inconclusive
    };
    Ok(BarrierSolution {
        q,
        a_star,
        x_max,
        extensions,
        method: scale.method.id(),
        hjb_rel: opts.hjb_rel,
        xs,
        value,
        value_d1,
        hjb_interior,
        hjb_exterior,
        flagged,
        convexity_cert,
        density_cert: certs.density,
        verdict,
        reasons,
    })
}
