//! Laplace-identity residuals and exponent recovery from a tabulated `W`.

use super::ScaleGrid;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::numeric::interp::hermite;
use crate::numeric::quad::{gauss_legendre_5, Quad};
use crate::shape::grid::{convexity_report, log_convexity_report, SECOND_DIFF_TOL};
use crate::shape::{Property, ShapeReport};

/// `W`, `W'`, `W''` sampled on an increasing grid of positive abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTable {
    pub xs: Vec<f64>,
    pub w: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl ScaleTable {
    pub fn from_grid(s: &ScaleGrid) -> Self {
        ScaleTable {
            xs: s.xs.clone(),
            w: s.w.clone(),
            w1: s.w1.clone(),
            w2: s.w2.clone(),
        }
    }

    /// Samples `f(x) = (W, W', W'')` at `xs`.
    pub fn from_fn<F: Fn(f64) -> (f64, f64, f64)>(xs: &[f64], f: F) -> Self {
        let mut t = ScaleTable {
            xs: xs.to_vec(),
            w: Vec::with_capacity(xs.len()),
            w1: Vec::with_capacity(xs.len()),
            w2: Vec::with_capacity(xs.len()),
        };
        for &x in xs {
            let (a, b, c) = f(x);
            t.w.push(a);
            t.w1.push(b);
            t.w2.push(c);
        }
        t
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.xs.len();
        if n < 8 || self.w.len() != n || self.w1.len() != n || self.w2.len() != n {
            return Err(Error::Domain(
                "scale table needs at least 8 rows of equal length".into(),
            ));
        }
        if self.xs[0] <= 0.0 || self.xs.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Domain(
                "scale table abscissae must be positive and increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Hermite body `∫_{x_0}^{x_N} e^{-θx} W(x) dx` with Gauss–Legendre panels.
fn body_integral(xs: &[f64], w: &[f64], w1: &[f64], theta: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let (a, b) = (xs[i], xs[i + 1]);
        total += gauss_legendre_5(
            |x| (-theta * x).exp() * hermite(a, b, w[i], w[i + 1], w1[i], w1[i + 1], x).0,
            a,
            b,
        );
    }
    total
}

/// `∫_0^{x_0} e^{-θx} W(x) dx` from a fit `W ≈ w0 + c (x/x_0)^p`.
fn head_integral<F: Fn(f64) -> f64>(head: F, x0: f64, theta: f64) -> Result<f64> {
    Ok(Quad::default()
        .integrate_sqrt_left(|x| (-theta * x).exp() * head(x), 0.0, x0)?
        .value)
}

/// Head fit through the first three rows of a table: `a + b x^p`, with a
/// linear fallback.
fn table_head(t: &ScaleTable) -> impl Fn(f64) -> f64 {
    let (x0, x1, x2) = (t.xs[0], t.xs[1], t.xs[2]);
    let (d1, d2) = (t.w[1] - t.w[0], t.w[2] - t.w[1]);
    let r1 = x1 / x0;
    let geometric = ((x2 / x1) - r1).abs() < 1e-9 * r1;
    let (a, b, p) = if geometric && d1 > 0.0 && d2 > 0.0 {
        let p = ((d2 / d1).ln() / r1.ln()).clamp(0.05, 4.0);
        let b = d1 / (x0.powf(p) * (r1.powf(p) - 1.0));
        (t.w[0] - b * x0.powf(p), b, p)
    } else {
        let b = (t.w[1] - t.w[0]) / (x1 - x0);
        (t.w[0] - b * x0, b, 1.0)
    };
    move |x: f64| (a + b * x.powf(p)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LaplaceResidual {
    pub theta: f64,
    /// `∫_0^∞ e^{-θx} W^{(q)}(x) dx` with the tail past `x_max` extrapolated.
    pub integral: f64,
    /// `|integral·(ψ(θ) - q) - 1|`.
    pub residual: f64,
    /// Bound on the error of the extrapolated tail, in residual units.
    pub truncation_bound: f64,
}

/// Default distance `θ - Φ(q)` below which the truncated tail is not trusted.
pub const LAPLACE_MARGIN: f64 = 0.5;

pub fn laplace_residual(scale: &ScaleGrid, model: &LevyModel, theta: f64, margin: f64) -> Result<LaplaceResidual> {
    let beta = theta - scale.phi_q;
    if !(beta > margin) {
        return Err(Error::Domain(format!(
            "theta = {theta} must exceed Φ(q) + margin = {}",
            scale.phi_q + margin
        )));
    }
    let x0 = scale.xs[0];
    let head = head_integral(|x| scale.head(x).0, x0, theta)?;
    let body = body_integral(&scale.xs, &scale.w, &scale.w1, theta);
    let n = scale.xs.len() - 1;
    let big_x = scale.xs[n];
    let g = scale.g[n];
    let g1 = (-scale.phi_q * big_x).exp() * scale.u_q[n];
    let decay = (-beta * big_x).exp();
    let tail = decay * (g / beta + g1 / (beta * beta));
    let integral = head + body + tail;
    let denom = model.psi(theta)? - scale.q;
    Ok(LaplaceResidual {
        theta,
        integral,
        residual: (integral * denom - 1.0).abs(),
        truncation_bound: decay * g1.abs() / (beta * beta) * denom.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RecoveredExponent {
    pub thetas: Vec<f64>,
    pub psi_hat: Vec<f64>,
    /// `ψ̂` at a small positive argument; close to 0 for a valid exponent.
    pub psi_near_zero: f64,
    pub hypotheses: Vec<(String, ShapeReport)>,
    pub checks: Vec<(String, ShapeReport)>,
}

const MONO_TOL: f64 = 1e-6;

/// Non-increasing up to `tol` relative to the largest magnitude.
fn globally_non_increasing(xs: &[f64], f: &[f64], tol: f64) -> ShapeReport {
    let interval = (xs[0], xs[xs.len() - 1]);
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut r = ShapeReport::new(Property::NonIncreasing, interval, tol);
    for i in 0..xs.len() - 1 {
        r.record((f[i + 1] - f[i]) / scale, xs[i + 1]);
    }
    r.finish()
}

fn table_transform(t: &ScaleTable, theta: f64) -> Result<f64> {
    let head = head_integral(table_head(t), t.xs[0], theta)?;
    let body = body_integral(&t.xs, &t.w, &t.w1, theta);
    let n = t.xs.len() - 1;
    let tail = (-theta * t.xs[n]).exp() * (t.w[n] / theta + t.w1[n] / (theta * theta));
    Ok(head + body + tail)
}

/// Size of the error a finite difference of `W'` at relative accuracy
/// `1e-9` leaves in `W''` at node `i`.
fn w2_noise(xs: &[f64], w1: &[f64], i: usize) -> f64 {
    let h = if i + 1 < xs.len() {
        xs[i + 1] - xs[i]
    } else {
        xs[i] - xs[i - 1]
    };
    1e-9 * w1[i].abs() / h
}

/// `ψ̂(θ) = 1/∫_0^∞ e^{-θx} W(x) dx` for a candidate 0-scale function,
/// after checking the testable hypotheses on `W`.
pub fn recover_exponent(table: &ScaleTable, thetas: &[f64]) -> Result<RecoveredExponent> {
    table.check_shape()?;
    if thetas.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("recovery needs positive theta values".into()));
    }
    let xs = &table.xs;
    let interval = (xs[0], xs[xs.len() - 1]);
    let w1_scale = table.w1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * table.w2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let neg_w2: Vec<f64> = (0..xs.len())
        .map(|i| {
            let v = table.w2[i];
            if v.abs() <= floor.max(w2_noise(xs, &table.w1, i)) {
                0.0
            } else {
                -v
            }
        })
        .collect();

    let mut hypotheses = vec![
        (
            "W concave".to_string(),
            convexity_report(xs, &table.w, interval, Property::Concave, SECOND_DIFF_TOL),
        ),
        (
            "W non-decreasing".to_string(),
            crate::shape::grid::monotonicity_report(xs, &table.w, interval, Property::NonDecreasing, MONO_TOL),
        ),
        (
            "W' non-increasing".to_string(),
            globally_non_increasing(xs, &table.w1, MONO_TOL),
        ),
        (
            "-W'' non-increasing".to_string(),
            globally_non_increasing(xs, &neg_w2, MONO_TOL),
        ),
        (
            "-W'' log convex".to_string(),
            log_convexity_report(xs, &neg_w2, interval, SECOND_DIFF_TOL),
        ),
    ];
    let mut near_zero = ShapeReport::new(Property::NonIncreasing, (xs[0], xs[15.min(xs.len() - 1)]), 0.0);
    for i in 0..16.min(xs.len()) {
        let v = xs[i] * table.w1[i];
        near_zero.record(
            if v.is_finite() && v <= 1e6 * (1.0 + w1_scale * xs[15]) {
                -1.0
            } else {
                1.0
            },
            xs[i],
        );
    }
    hypotheses.push((
        "x W'(x) bounded as x -> 0".to_string(),
        near_zero
            .finish()
            .with_note("finite-sample check on the first grid rows"),
    ));
    let failed: Vec<String> = hypotheses
        .iter()
        .filter(|(_, r)| !r.pass)
        .map(|(n, r)| format!("{n} (worst {:.3e} at x = {:.6})", r.worst_violation, r.location))
        .collect();
    if !failed.is_empty() {
        return Err(Error::Precondition(format!(
            "candidate is not a 0-scale function of the required kind: {}",
            failed.join("; ")
        )));
    }

    let psi_hat = thetas
        .iter()
        .map(|&t| table_transform(table, t).map(|i| 1.0 / i))
        .collect::<Result<Vec<_>>>()?;

    let lo = 0.1 * thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = 2.0 * thetas.iter().cloned().fold(0.0, f64::max);
    let probe: Vec<f64> = (0..24).map(|i| lo * (hi / lo).powf(i as f64 / 23.0)).collect();
    let probe_psi = probe
        .iter()
        .map(|&t| table_transform(table, t).map(|i| 1.0 / i))
        .collect::<Result<Vec<_>>>()?;
    let probe_phi: Vec<f64> = probe.iter().zip(&probe_psi).map(|(t, p)| p / t).collect();
    let span = (lo, hi);
    let checks = vec![
        (
            "psi_hat convex".to_string(),
            convexity_report(&probe, &probe_psi, span, Property::Convex, SECOND_DIFF_TOL),
        ),
        (
            "psi_hat(theta)/theta concave".to_string(),
            convexity_report(&probe, &probe_phi, span, Property::Concave, SECOND_DIFF_TOL),
        ),
    ];
    let psi_near_zero = 1.0 / table_transform(table, 1e-6)?;
    Ok(RecoveredExponent {
        thetas: thetas.to_vec(),
        psi_hat,
        psi_near_zero,
        hypotheses,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{GridSpec, ScaleOptions};

    fn opts() -> ScaleOptions {
        ScaleOptions {
            grid: GridSpec {
                points: 600,
                log_points: 80,
                ..GridSpec::default()
            },
            ..ScaleOptions::default()
        }
    }

    #[test]
    fn residual_small_for_cramer_lundberg() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        for q in [0.0, 0.1, 1.0] {
            let s = ScaleGrid::compute(&cl, q, &opts()).unwrap();
            for d in [1.0, 2.0, 5.0] {
                let r = laplace_residual(&s, &cl, s.phi_q + d, LAPLACE_MARGIN).unwrap();
                assert!(r.residual < 1e-6, "q={q} d={d}: {r:?}");
            }
        }
        let s = ScaleGrid::compute(&cl, 0.1, &opts()).unwrap();
        assert!(laplace_residual(&s, &cl, s.phi_q + 0.2, LAPLACE_MARGIN).is_err());
    }

    #[test]
    fn bernstein_candidate_recovers_quadratic() {
        let xs = GridSpec::default().nodes().unwrap();
        let t = ScaleTable::from_fn(&xs, |x| (1.0 - (-x).exp(), (-x).exp(), -(-x).exp()));
        let r = recover_exponent(&t, &[1.0, 2.0, 5.0]).unwrap();
        for (th, p) in r.thetas.iter().zip(&r.psi_hat) {
            let e = th * (th + 1.0);
            assert!((p - e).abs() < 1e-6 * e, "{th}: {p} vs {e}");
        }
        assert!(r.checks.iter().all(|(_, c)| c.pass));
        assert!(r.psi_near_zero.abs() < 1e-4);
    }

    #[test]
    fn convex_candidate_is_rejected() {
        let xs = GridSpec::default().nodes().unwrap();
        let t = ScaleTable::from_fn(&xs, |x| (x * x, 2.0 * x, 2.0));
        match recover_exponent(&t, &[1.0]) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("W concave")),
            other => panic!("{other:?}"),
        }
    }
}
