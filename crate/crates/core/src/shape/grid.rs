//! Sampled convexity and monotonicity on tabulated data.

use super::{Property, ShapeReport};

/// Default tolerance on scaled second differences.
pub const SECOND_DIFF_TOL: f64 = 1e-7;
/// Margin demanded by the strict variant.
pub const STRICT_TOL: f64 = 1e-10;

fn indices_in(xs: &[f64], (a, b): (f64, f64)) -> std::ops::Range<usize> {
    let lo = xs.partition_point(|&x| x < a);
    let hi = xs.partition_point(|&x| x <= b);
    lo..hi
}

/// Second-difference test on `f(xs)` restricted to `interval`.
///
/// The chord through the neighbours is compared with the middle value and
/// the gap is scaled by the local magnitude, so that on a uniform grid the
/// quantity is `(f_{i-1} - 2f_i + f_{i+1}) / max|f|`.
pub fn convexity_report(xs: &[f64], f: &[f64], interval: (f64, f64), property: Property, tol: f64) -> ShapeReport {
    assert!(matches!(
        property,
        Property::Convex | Property::Concave | Property::StrictlyConvex
    ));
    let range = indices_in(xs, interval);
    let tolerance = if property == Property::StrictlyConvex { 0.0 } else { tol };
    let mut report = ShapeReport::new(property, interval, tolerance);
    if range.len() < 8 {
        return report.finish().with_note(format!(
            "only {} grid points in interval; at least 8 needed",
            range.len()
        ));
    }
    for i in range.start + 1..range.end - 1 {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let t = (x1 - x0) / (x2 - x0);
        let chord = (1.0 - t) * f[i - 1] + t * f[i + 1];
        let scale = f[i - 1]
            .abs()
            .max(f[i].abs())
            .max(f[i + 1].abs())
            .max(f64::MIN_POSITIVE);
        let d2 = 2.0 * (chord - f[i]) / scale;
        let excess = match property {
            Property::Convex => -d2,
            Property::Concave => d2,
            _ => STRICT_TOL - d2,
        };
        report.record(excess, x1);
    }
    report.finish()
}

/// Monotonicity of `f(xs)` on `interval`, relative to the local magnitude.
pub fn monotonicity_report(xs: &[f64], f: &[f64], interval: (f64, f64), property: Property, tol: f64) -> ShapeReport {
    assert!(matches!(property, Property::NonIncreasing | Property::NonDecreasing));
    let range = indices_in(xs, interval);
    let mut report = ShapeReport::new(property, interval, tol);
    for i in range.start..range.end.saturating_sub(1) {
        let scale = f[i].abs().max(f[i + 1].abs()).max(f64::MIN_POSITIVE);
        let rise = (f[i + 1] - f[i]) / scale;
        let excess = if property == Property::NonIncreasing {
            rise
        } else {
            -rise
        };
        report.record(excess, xs[i + 1]);
    }
    report.finish()
}

/// Log-convexity of tabulated positive data (chord form on `log f`).
/// Data that vanish identically pass as the degenerate case.
pub fn log_convexity_report(xs: &[f64], f: &[f64], interval: (f64, f64), tol: f64) -> ShapeReport {
    let range = indices_in(xs, interval);
    let mut report = ShapeReport::new(Property::LogConvex, interval, tol);
    let fmax = range.clone().fold(0.0f64, |m, i| m.max(f[i].abs()));
    if fmax == 0.0 {
        return report.finish().with_note("identically zero");
    }
    let floor = 1e-9 * fmax;
    for i in range.start + 1..range.end.saturating_sub(1) {
        let vals = [f[i - 1], f[i], f[i + 1]];
        if vals.iter().any(|&v| v <= floor) {
            if vals.iter().any(|&v| v < -floor) {
                report.record(f64::INFINITY, xs[i]);
            }
            continue;
        }
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let t = (x1 - x0) / (x2 - x0);
        let chord = (1.0 - t) * vals[0].ln() + t * vals[2].ln();
        report.record(2.0 * (vals[1].ln() - chord), x1);
    }
    report.finish()
}
