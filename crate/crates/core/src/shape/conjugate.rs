//! Grid-level consequences of the special-subordinator structure of `W'`.
//!
//! A potential density `u` that is non-increasing splits as
//! `u = u(∞) + Ῡ*`, where `Ῡ*` is the Lévy tail of the conjugate
//! subordinator `h*`. When `u(0+) < ∞` the conjugate potential density
//! `u*` solves the renewal equation
//!
//! `u(0+) u*(t) = -d u'(t) - ∫_0^t u'(t-s) u*(s) ds`,  `d = 1/u(0+)`,
//!
//! and `d u(t) + ∫_0^t u*(t-s) u(s) ds = 1` recovers `u` from `u*`.

use super::grid::log_convexity_report;
use super::{Property, ShapeReport};
use crate::error::{Error, Result};
use crate::numeric::interp::{derivative_5pt, hermite, locate};
use crate::scale::ScaleGrid;

const MONO_TOL: f64 = 1e-6;
const LOG_TOL: f64 = 1e-7;

/// Non-increasing up to `tol` times `scale`.
fn non_increasing(xs: &[f64], f: &[f64], scale: f64, tol: f64) -> ShapeReport {
    let mut r = ShapeReport::new(Property::NonIncreasing, (xs[0], xs[xs.len() - 1]), tol);
    let scale = scale.max(f64::MIN_POSITIVE);
    for i in 0..xs.len() - 1 {
        r.record((f[i + 1] - f[i]) / scale, xs[i + 1]);
    }
    r.finish()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConjugateTail {
    pub xs: Vec<f64>,
    /// `Ῡ*(x) ≈ W'(x) - W'(x_max)`.
    pub tail: Vec<f64>,
    /// `W'(x_max)`, standing in for `W'(∞)`.
    pub w1_at_infinity: f64,
    pub non_increasing: ShapeReport,
    pub non_negative: ShapeReport,
    pub bias_note: String,
}

/// `Ῡ*` from a 0-scale grid. `certificate` must be a passing
/// log-convexity report for `Π̄`.
pub fn conjugate_tail(scale: &ScaleGrid, certificate: Option<&ShapeReport>) -> Result<ConjugateTail> {
    if scale.q != 0.0 || scale.phi_q != 0.0 {
        return Err(Error::Precondition(format!(
            "conjugate tail needs a 0-scale function with Φ(0) = 0 (got q = {}, Φ = {})",
            scale.q, scale.phi_q
        )));
    }
    match certificate {
        Some(c) if c.property == Property::LogConvex && c.pass => {}
        Some(_) => return Err(Error::Precondition("log-convexity of Π̄ is not certified".into())),
        None => return Err(Error::Precondition("log-convexity of Π̄ was not checked".into())),
    }
    let n = scale.xs.len();
    let w_inf = scale.w1[n - 1];
    let tail: Vec<f64> = scale.w1.iter().map(|w| w - w_inf).collect();
    let mag = scale.w1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let non_increasing = non_increasing(&scale.xs, &tail, mag, MONO_TOL);
    let mut non_negative = ShapeReport::new(Property::NonIncreasing, (scale.xs[0], scale.xs[n - 1]), MONO_TOL);
    for (x, t) in scale.xs.iter().zip(&tail) {
        non_negative.record(-t / mag.max(f64::MIN_POSITIVE), *x);
    }
    let non_negative = non_negative.finish().with_note("Ῡ* ≥ 0");
    let slope = (scale.w1[n - 1] - scale.w1[n - 2]).abs() / (scale.xs[n - 1] - scale.xs[n - 2]);
    Ok(ConjugateTail {
        xs: scale.xs.clone(),
        tail,
        w1_at_infinity: w_inf,
        non_increasing,
        non_negative,
        bias_note: format!(
            "W'(∞) replaced by W'(x_max) = {w_inf:.6e}; Ῡ* is biased by W'(x_max) - W'(∞) ≥ 0 (|W''(x_max)| = {slope:.3e})"
        ),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConjugateShapeReport {
    pub hypotheses: Vec<(String, ShapeReport)>,
    /// Recovered Lévy density of the conjugate pair is non-increasing.
    pub conclusion: Option<ShapeReport>,
    /// `u(0+)`; infinite values skip the renewal step.
    pub u0: f64,
    pub recovered_drift: Option<f64>,
    /// `max |u - u_roundtrip| / u(0+)` after `u → u* → u`.
    pub round_trip_error: Option<f64>,
    pub note: Option<String>,
}

impl ConjugateShapeReport {
    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|(_, r)| r.pass)
    }

    pub fn pass(&self) -> bool {
        self.hypotheses_pass() && self.conclusion.as_ref().is_none_or(|c| c.pass)
    }
}

/// Uniform nodes used by the renewal solver.
const RENEWAL_NODES: usize = 1600;
/// Allowance for the `O(h²)` trapezoid error in the recovered density.
const RENEWAL_TOL: f64 = 1e-4;

/// Checks the hypotheses on a candidate potential density `u = h` (with
/// `h1 = u'`) and, when `u(0+)` is finite, composes the conjugate map twice.
pub fn conjugate_shape_check(xs: &[f64], h: &[f64], h1: &[f64]) -> Result<ConjugateShapeReport> {
    let n = xs.len();
    if n < 8 || h.len() != n || h1.len() != n {
        return Err(Error::Domain(
            "conjugate shape check needs at least 8 rows of u and u'".into(),
        ));
    }
    let interval = (xs[0], xs[n - 1]);
    let mag = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let neg: Vec<f64> = h1.iter().map(|v| -v).collect();
    let neg_mag = neg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * neg_mag;
    let neg_clean: Vec<f64> = neg.iter().map(|&v| if v.abs() <= floor { 0.0 } else { v }).collect();
    let hypotheses = vec![
        ("u non-increasing".to_string(), non_increasing(xs, h, mag, MONO_TOL)),
        (
            "-u' non-increasing".to_string(),
            non_increasing(xs, &neg_clean, neg_mag, MONO_TOL),
        ),
        (
            "-u' log convex".to_string(),
            log_convexity_report(xs, &neg_clean, interval, LOG_TOL),
        ),
    ];
    let mut report = ConjugateShapeReport {
        hypotheses,
        conclusion: None,
        u0: f64::INFINITY,
        recovered_drift: None,
        round_trip_error: None,
        note: None,
    };
    if !report.hypotheses_pass() {
        report.note = Some("hypotheses fail; conjugate composition skipped".into());
        return Ok(report);
    }
    // Cubic continuation of u below the first row.
    let head = |t: f64| hermite(xs[0], xs[1], h[0], h[1], h1[0], h1[1], t);
    let u0 = head(0.0).0;
    // u(0+) is finite only if x·u'(x) → 0 as well.
    let bounded = (xs[0] * h1[0]).abs() <= 0.05 * h[0].abs().max(f64::MIN_POSITIVE) && u0.is_finite() && u0 > 0.0;
    if !bounded {
        report.note = Some("u(0+) is infinite or not resolved; only the hypotheses are checked".into());
        return Ok(report);
    }
    report.u0 = u0;
    let t_max = xs[n - 1];
    let step = t_max / (RENEWAL_NODES - 1) as f64;
    let ts: Vec<f64> = (0..RENEWAL_NODES).map(|i| i as f64 * step).collect();
    let sample = |t: f64| -> (f64, f64) {
        let i = locate(xs, t);
        hermite(xs[i], xs[i + 1], h[i], h[i + 1], h1[i], h1[i + 1], t)
    };
    let (u, du): (Vec<f64>, Vec<f64>) = ts.iter().map(|&t| sample(t)).unzip();
    let d = 1.0 / u0;

    // u0 u*(t) = -d u'(t) - ∫_0^t u'(t-s) u*(s) ds, trapezoid in s.
    let mut ustar = vec![0.0; ts.len()];
    ustar[0] = -d * du[0] / u0;
    for k in 1..ts.len() {
        let mut acc = 0.5 * du[k] * ustar[0];
        for j in 1..k {
            acc += du[k - j] * ustar[j];
        }
        ustar[k] = (-d * du[k] - step * acc) / (u0 + 0.5 * step * du[0]);
    }
    // Lévy density of the recovered subordinator: -u*'.
    let dens: Vec<f64> = derivative_5pt(&ts, &ustar).iter().map(|v| -v).collect();
    let dmag = dens
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(ustar.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let m = ts.len();
    let mut conclusion = non_increasing(&ts[3..m - 3], &dens[3..m - 3], dmag, RENEWAL_TOL);
    conclusion.note = Some("recovered Lévy density -u*' is non-increasing".into());
    report.conclusion = Some(conclusion);
    report.recovered_drift = Some(d);

    // d u(t) + ∫_0^t u*(t-s) u(s) ds = 1, solved for u.
    let mut back = vec![0.0; ts.len()];
    back[0] = 1.0 / d;
    for k in 1..ts.len() {
        let mut acc = 0.5 * ustar[k] * back[0];
        for j in 1..k {
            acc += ustar[k - j] * back[j];
        }
        back[k] = (1.0 - step * acc) / (d + 0.5 * step * ustar[0]);
    }
    let err = u.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / u0;
    report.round_trip_error = Some(err);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs() -> Vec<f64> {
        (1..=800).map(|i| 8.0 * i as f64 / 800.0).collect()
    }

    #[test]
    fn exponential_density_passes() {
        let xs = xs();
        let h: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        let h1: Vec<f64> = h.iter().map(|v| -v).collect();
        let r = conjugate_shape_check(&xs, &h, &h1).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!((r.recovered_drift.unwrap() - 1.0).abs() < 1e-4);
        assert!(r.round_trip_error.unwrap() < 1e-4);
    }

    #[test]
    fn harmonic_density_passes() {
        let xs = xs();
        let h: Vec<f64> = xs.iter().map(|x| 1.0 / (1.0 + x)).collect();
        let h1: Vec<f64> = xs.iter().map(|x| -1.0 / (1.0 + x).powi(2)).collect();
        let r = conjugate_shape_check(&xs, &h, &h1).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn convex_bump_fails() {
        let xs = xs();
        let bump = |x: f64| 0.3 * (-(x - 3.0).powi(2) * 4.0).exp();
        let h: Vec<f64> = xs.iter().map(|&x| (-x).exp() + bump(x)).collect();
        let h1: Vec<f64> = xs.iter().map(|&x| -(-x).exp() - 8.0 * (x - 3.0) * bump(x)).collect();
        let r = conjugate_shape_check(&xs, &h, &h1).unwrap();
        assert!(!r.pass());
        assert!(r
            .hypotheses
            .iter()
            .any(|(_, h)| !h.pass && h.location > 2.0 && h.location < 4.0));
    }
}
