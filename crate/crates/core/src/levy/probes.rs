//! Sampled shape certificates for functions given as closures.

use crate::error::{Error, Result};
use crate::numeric::interp::fd_weights;
use crate::shape::{Property, ShapeReport};

/// Default tolerance on second differences of `log f`.
pub const LOG_CONVEXITY_TOL: f64 = 1e-7;

/// Log-convexity on a geometric grid of `n` points in `[a, b]`, `a > 0`.
///
/// On a non-uniform grid the test compares `log f(x_i)` with the chord
/// through its neighbours, scaled so that on a uniform grid it equals the
/// usual second difference `L(x_{i-1}) - 2L(x_i) + L(x_{i+1})`.
pub fn log_convexity_check<F: Fn(f64) -> f64>(f: F, interval: (f64, f64), n: usize, tol: f64) -> Result<ShapeReport> {
    let (a, b) = interval;
    if !(a > 0.0 && b > a) {
        return Err(Error::Domain(format!(
            "log-convexity grid needs 0 < a < b, got [{a}, {b}]"
        )));
    }
    if n < 3 {
        return Err(Error::Domain("log-convexity grid needs at least 3 points".into()));
    }
    let ratio = (b / a).ln() / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a * (ratio * i as f64).exp() })
        .collect();
    let mut logs = Vec::with_capacity(n);
    for &x in &xs {
        let v = f(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("log-convexity needs f > 0, got f({x}) = {v}")));
        }
        logs.push(v.ln());
    }
    let mut report = ShapeReport::new(Property::LogConvex, interval, tol);
    for i in 1..n - 1 {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let t = (x1 - x0) / (x2 - x0);
        let chord = (1.0 - t) * logs[i - 1] + t * logs[i + 1];
        report.record(2.0 * (logs[i] - chord), x1);
    }
    Ok(report.finish())
}

/// Where a function's logarithmic slope jumps.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Kink {
    pub location: f64,
    pub left_log_slope: f64,
    pub right_log_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SignViolation {
    pub order: usize,
    pub x: f64,
    /// `(-1)^k f^{(k)}(x)`, negative beyond noise.
    pub signed_derivative: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CmProbe {
    pub report: ShapeReport,
    pub kink: Option<Kink>,
    pub sign_violation: Option<SignViolation>,
}

const CM_SAMPLES: usize = 96;
const KINK_TOL: f64 = 1e-4;

/// Heuristic complete-monotonicity probe: the sign pattern
/// `(-1)^k f^{(k)} ≥ 0` for `k ≤ order` by finite differences, plus a scan
/// for jumps in `f'/f`, which no completely monotone function can have.
pub fn complete_monotonicity_probe<F: Fn(f64) -> f64>(f: F, interval: (f64, f64), order: usize) -> Result<CmProbe> {
    let (a, b) = interval;
    if !(2..=8).contains(&order) {
        return Err(Error::Domain(format!("probe order must lie in 2..=8, got {order}")));
    }
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("bad probe interval [{a}, {b}]")));
    }
    let nodes = order + 5 + (order + 5 + 1) % 2;
    let half = (nodes - 1) / 2;
    let width = b - a;
    let mut report = ShapeReport::new(Property::CmProbe, interval, 0.0);
    let mut sign_violation = None;

    for i in 0..CM_SAMPLES {
        let x = a + width * (i as f64 + 0.5) / CM_SAMPLES as f64;
        let room = (x - a).min(b - x);
        let mut h = 0.25f64.min(room / half as f64);
        if a >= 0.0 {
            h = h.min(x / (4.0 * half as f64));
        }
        if !(h > 1e-6 * x.abs().max(1.0)) {
            if i == 0 || i == CM_SAMPLES - 1 {
                continue;
            }
            return Err(Error::Domain(format!("finite-difference step underflow at x = {x}")));
        }
        let pts: Vec<f64> = (0..nodes).map(|j| x + (j as f64 - half as f64) * h).collect();
        let vals: Vec<f64> = pts.iter().map(|&p| f(p)).collect();
        let w = fd_weights(x, &pts, order);
        let fmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        #[allow(clippy::needless_range_loop)]
        for k in 1..=order {
            let d: f64 = w[k].iter().zip(&vals).map(|(c, v)| c * v).sum();
            let noise: f64 = w[k].iter().map(|c| c.abs()).sum::<f64>() * fmax * 1e-13;
            let signed = if k % 2 == 0 { d } else { -d };
            let excess = (-signed - noise) / fmax.max(f64::MIN_POSITIVE);
            report.record(excess, x);
            if excess > 0.0 && sign_violation.is_none() {
                sign_violation = Some(SignViolation {
                    order: k,
                    x,
                    signed_derivative: signed,
                });
            }
        }
    }

    let kink = find_kink(&f, interval);
    let mut report = report.finish();
    if let Some(k) = kink {
        let jump = (k.right_log_slope - k.left_log_slope).abs();
        report.pass = false;
        report.worst_violation = report.worst_violation.max(jump);
        report.location = k.location;
        report.note = Some(format!(
            "f'/f jumps at x = {:.9}: left {:.6}, right {:.6}",
            k.location, k.left_log_slope, k.right_log_slope
        ));
    } else if let Some(v) = sign_violation {
        report.note = Some(format!("(-1)^{0} f^({0}) < 0 at x = {1:.6}", v.order, v.x));
    }
    Ok(CmProbe {
        report,
        kink,
        sign_violation,
    })
}

fn log_slope<F: Fn(f64) -> f64>(f: &F, x: f64, forward: bool) -> f64 {
    let h = 1e-5 * x.abs().max(1e-2);
    let s = if forward { h } else { -h };
    let f0 = f(x);
    let d = (-3.0 * f0 + 4.0 * f(x + s) - f(x + 2.0 * s)) / (2.0 * s);
    if f0.abs() > 0.0 {
        d / f0.abs()
    } else {
        d
    }
}

fn find_kink<F: Fn(f64) -> f64>(f: &F, (a, b): (f64, f64)) -> Option<Kink> {
    let pad = 1e-3 * (b - a);
    let (a, b) = (a + pad, b - pad);
    let cells = CM_SAMPLES;
    let mut best: Option<Kink> = None;
    for i in 0..cells {
        let mut l = a + (b - a) * i as f64 / cells as f64;
        let mut r = a + (b - a) * (i + 1) as f64 / cells as f64;
        let mut sl = log_slope(f, l, false);
        let mut sr = log_slope(f, r, true);
        for _ in 0..48 {
            let m = 0.5 * (l + r);
            if !(m > l && m < r) {
                break;
            }
            let sm_f = log_slope(f, m, true);
            let sm_b = log_slope(f, m, false);
            if (sm_f - sl).abs() >= (sr - sm_b).abs() {
                r = m;
                sr = sm_f;
            } else {
                l = m;
                sl = sm_b;
            }
        }
        let jump = (sr - sl).abs();
        if jump > KINK_TOL * sl.abs().max(sr.abs()).max(1.0) {
            let k = Kink {
                location: 0.5 * (l + r),
                left_log_slope: sl,
                right_log_slope: sr,
            };
            let bigger = best
                .map(|bk| jump > (bk.right_log_slope - bk.left_log_slope).abs())
                .unwrap_or(true);
            if bigger {
                best = Some(k);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{PiecewiseExp, PiecewisePower};

    #[test]
    fn log_convexity_examples() {
        let r = log_convexity_check(|x: f64| (-2.0 * x).exp(), (0.1, 10.0), 512, LOG_CONVEXITY_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        let p = PiecewisePower::new(1.5, 0.5, 1.0).unwrap();
        let r = log_convexity_check(|x| p.density(x), (0.01, 50.0), 512, LOG_CONVEXITY_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        let r = log_convexity_check(|x: f64| (-x * x).exp(), (0.1, 3.0), 512, LOG_CONVEXITY_TOL).unwrap();
        assert!(!r.pass);
        assert!(r.worst_violation > 0.0);
        assert!(log_convexity_check(|_| 0.0, (0.1, 1.0), 16, LOG_CONVEXITY_TOL).is_err());
    }

    #[test]
    fn exponential_is_cm_to_order_eight() {
        let p = complete_monotonicity_probe(|x: f64| (-x).exp(), (0.1, 10.0), 8).unwrap();
        assert!(p.report.pass, "{:?}", p);
        let c = complete_monotonicity_probe(|_| 3.0, (0.1, 10.0), 8).unwrap();
        assert!(c.report.pass, "{:?}", c);
    }

    #[test]
    fn kinked_density_fails_at_alpha() {
        let d = PiecewiseExp::kinked(0.5, 1.0).unwrap();
        let p = complete_monotonicity_probe(|x| d.density(x), (0.1, 10.0), 8).unwrap();
        assert!(!p.report.pass);
        let k = p.kink.expect("kink");
        assert!((k.location - 2.0).abs() < 1e-6, "{k:?}");
        assert!((k.left_log_slope + 1.0).abs() < 1e-6);
        assert!((k.right_log_slope + 0.5).abs() < 1e-6);
    }

    #[test]
    fn gaussian_shape_breaks_sign_pattern() {
        let p = complete_monotonicity_probe(|x: f64| (-x * x).exp(), (0.1, 3.0), 4).unwrap();
        assert!(!p.report.pass);
        assert!(p.sign_violation.is_some());
    }
}
