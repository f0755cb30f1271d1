//! Tabulated `q`-scale functions.
//!
//! `W^{(q)}(x) = e^{Φ(q)x} W_{Φ(q)}(x)` where `W_{Φ(q)}` has Laplace
//! transform `1/ψ_q(s)`, `ψ_q(s) = ψ(s + Φ(q)) - q`. The tilted function is
//! bounded, which keeps the inversion well conditioned. Its derivative is
//! inverted from `s/ψ_q(s) - W(0+)`, so `u_q = e^{Φ(q)x} W_{Φ(q)}'(x)` and
//! `W^{(q)}' = Φ(q)W^{(q)} + u_q` hold by construction.

mod atomic;
pub mod inversion;
mod residual;

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::levy::{JumpMeasure, LevyModel, Variation};
use crate::numeric::interp::{derivative_5pt, hermite, locate, monotone_slopes};

pub use inversion::EulerParams;
pub use residual::{
    laplace_residual, recover_exponent, LaplaceResidual, RecoveredExponent, ScaleTable, LAPLACE_MARGIN,
};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub log_points: usize,
    pub x_min: f64,
    pub x_log_end: f64,
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 2048,
            log_points: 256,
            x_min: 1e-4,
            x_log_end: 0.1,
            x_max: 10.0,
        }
    }
}

impl GridSpec {
    pub fn with_x_max(self, x_max: f64) -> Self {
        GridSpec { x_max, ..self }
    }

    /// Geometric on `[x_min, x_log_end]`, uniform on `(x_log_end, x_max]`.
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.x_min > 0.0 && self.x_log_end > self.x_min && self.x_max > 2.0 * self.x_log_end) {
            return Err(Error::Domain(format!("malformed grid specification {self:?}")));
        }
        if !(self.log_points >= 2 && self.points >= self.log_points + 8) {
            return Err(Error::Domain(format!("grid needs more points than {self:?}")));
        }
        let mut xs = Vec::with_capacity(self.points);
        let ratio = (self.x_log_end / self.x_min).ln() / (self.log_points - 1) as f64;
        for i in 0..self.log_points {
            xs.push(if i == self.log_points - 1 {
                self.x_log_end
            } else {
                self.x_min * (ratio * i as f64).exp()
            });
        }
        let lin = self.points - self.log_points;
        let step = (self.x_max - self.x_log_end) / lin as f64;
        for i in 1..=lin {
            xs.push(if i == lin {
                self.x_max
            } else {
                self.x_log_end + step * i as f64
            });
        }
        Ok(xs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Algorithm {
    /// Exact series for atomic jump measures, Euler inversion otherwise.
    Auto,
    EulerFourier(EulerParams),
    FixedTalbot {
        nodes: usize,
    },
    /// Finite exact series; bounded variation with atomic jumps only.
    AtomicSeries,
}

/// `Tilted` inverts `1/ψ_q`; `Direct` inverts `1/(ψ - q)` on a contour to
/// the right of `Φ(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Route {
    Tilted,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Method {
    pub algorithm: Algorithm,
    pub route: Route,
}

impl Default for Method {
    fn default() -> Self {
        Method {
            algorithm: Algorithm::Auto,
            route: Route::Tilted,
        }
    }
}

impl Method {
    pub fn id(&self) -> String {
        let alg = match self.algorithm {
            Algorithm::EulerFourier(p) => format!("euler_fourier(A={},n={},m={})", p.a, p.n, p.m),
            Algorithm::FixedTalbot { nodes } => format!("fixed_talbot(M={nodes})"),
            Algorithm::AtomicSeries => return "atomic_series".into(),
            Algorithm::Auto => "auto".into(),
        };
        let route = match self.route {
            Route::Tilted => "tilted",
            Route::Direct => "direct",
        };
        format!("{alg};{route}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaleOptions {
    pub grid: GridSpec,
    pub method: Method,
    pub exec: Exec,
}

/// `W^{(q)}` with derivatives on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    pub q: f64,
    pub phi_q: f64,
    /// `W^{(q)}(0+)`: `1/δ` for bounded variation, 0 otherwise.
    pub w0: f64,
    pub variation: Variation,
    pub xs: Vec<f64>,
    pub w: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub u_q: Vec<f64>,
    /// `g_q(x) = e^{-Φ(q)x} W^{(q)}(x) = W_{Φ(q)}(x)`.
    pub g: Vec<f64>,
    /// Nodes where `W''` is only distributional (kink in `W'`).
    pub kinks: Vec<bool>,
    pub method: Method,
    slopes: Vec<f64>,
    w3: Vec<f64>,
    /// Exact evaluator between nodes, when one exists.
    series: Option<atomic::AtomicSeries>,
}

/// `(ψ_q(s), s/ψ_q(s) - W(0+))` at `s`, where `ψ_q(s) = ψ(s + shift) - q`.
/// With bounded variation and finite jump mass the second entry is formed
/// as `(q - δ·shift + N(s + shift))/(δ ψ_q(s))` from `N(θ) = ∫(1 - e^{-θx})Π(dx)`,
/// which keeps its absolute error far below its size at large `|s|`.
fn tilted_pair(model: &LevyModel, q: f64, shift: f64, w0: f64, s: Complex64) -> Result<[Complex64; 2]> {
    let one = Complex64::new(1.0, 0.0);
    let theta = s + shift;
    if let (Some(d), Some(n)) = (model.bv_drift(), model.jumps().finite_integral(theta)) {
        let p = theta * d - n - q;
        return Ok([one / p, (n + q - d * shift) / (p * d)]);
    }
    let p = model.psi_complex(theta)? - q;
    Ok([one / p, s / p - w0])
}

/// Whether `ψ` continues analytically into the left half-plane with the
/// singularities the Talbot contour can enclose.
fn talbot_supported(model: &LevyModel) -> bool {
    match model.jumps() {
        JumpMeasure::None => true,
        JumpMeasure::PiecewiseExp(p) => {
            let s = p.segments();
            s.iter().all(|x| x.slope == s[0].slope && x.log_amp == s[0].log_amp)
        }
        _ => false,
    }
}

fn invert_pair<F>(transform: F, x: f64, algorithm: &Algorithm) -> Result<[f64; 2]>
where
    F: Fn(Complex64) -> Result<[Complex64; 2]>,
{
    match algorithm {
        Algorithm::EulerFourier(p) => inversion::euler(transform, x, p),
        Algorithm::FixedTalbot { nodes } => inversion::talbot(transform, x, *nodes),
        Algorithm::Auto | Algorithm::AtomicSeries => unreachable!("resolved before inversion"),
    }
}

impl ScaleGrid {
    pub fn compute(model: &LevyModel, q: f64, opts: &ScaleOptions) -> Result<ScaleGrid> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("q must be finite and non-negative, got {q}")));
        }
        let phi = model.phi(q)?;
        let w0 = model.bv_drift().map(|d| 1.0 / d).unwrap_or(0.0);
        let xs = opts.grid.nodes()?;
        let mut method = opts.method;
        if method.algorithm == Algorithm::Auto {
            method.algorithm = match model.jumps() {
                JumpMeasure::Atoms(_) => Algorithm::AtomicSeries,
                _ => Algorithm::EulerFourier(EulerParams::default()),
            };
        }
        if method.algorithm == Algorithm::AtomicSeries {
            return Self::from_atomic_series(model, q, phi, xs, method);
        }
        if matches!(method.algorithm, Algorithm::FixedTalbot { .. }) && !talbot_supported(model) {
            return Err(Error::Unsupported(
                "fixed Talbot needs a Laplace exponent that continues into Re θ < 0 (no jumps or exponential jumps)"
                    .into(),
            ));
        }
        if let (Route::Direct, Algorithm::EulerFourier(p)) = (method.route, method.algorithm) {
            let x_max = *xs.last().unwrap();
            if p.abscissa(x_max) <= phi {
                return Err(Error::Inversion {
                    x: x_max,
                    reason: format!(
                        "direct route needs the Bromwich abscissa {:.4} to exceed Φ(q) = {phi:.4}",
                        p.abscissa(x_max)
                    ),
                });
            }
        }
        let shift = if method.route == Route::Tilted { phi } else { 0.0 };
        let pairs = opts.exec.try_map(xs.len(), |i| {
            let x = xs[i];
            let result = invert_pair(|s: Complex64| tilted_pair(model, q, shift, w0, s), x, &method.algorithm);
            result.map(|[a, b]| {
                let e = (phi * x).exp();
                match method.route {
                    Route::Tilted => (e * a, e * b),
                    Route::Direct => (a, b - phi * a),
                }
            })
        })?;
        let w: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let u_q: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let w1: Vec<f64> = w.iter().zip(&u_q).map(|(w, u)| phi * w + u).collect();
        let du = derivative_5pt(&xs, &u_q);
        let w2: Vec<f64> = w1.iter().zip(&du).map(|(a, b)| phi * a + b).collect();
        let g: Vec<f64> = xs.iter().zip(&w).map(|(x, w)| (-phi * x).exp() * w).collect();
        let kinks = detect_kinks(&w1, &w2);
        validate(&xs, &w, &w1)?;
        let slopes = monotone_slopes(&xs, &w, &w1);
        let w3 = derivative_5pt(&xs, &w2);
        Ok(ScaleGrid {
            q,
            phi_q: phi,
            w0,
            variation: model.variation(),
            xs,
            w,
            w1,
            w2,
            u_q,
            g,
            kinks,
            method,
            w3,
            slopes,
            series: None,
        })
    }

    fn from_atomic_series(model: &LevyModel, q: f64, phi: f64, xs: Vec<f64>, method: Method) -> Result<ScaleGrid> {
        let (delta, atoms) = match (model.bv_drift(), model.jumps()) {
            (Some(d), JumpMeasure::Atoms(a)) => (d, a.as_slice()),
            (Some(d), JumpMeasure::None) => (d, &[][..]),
            _ => {
                return Err(Error::Unsupported(
                    "the atomic series needs bounded variation with atomic or no jumps".into(),
                ))
            }
        };
        let x_max = *xs.last().unwrap();
        let series = atomic::AtomicSeries::new(delta, atoms, q, x_max)?;
        let vals: Vec<(f64, f64, f64)> = xs.iter().map(|&x| series.eval(x)).collect();
        let w: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let w1: Vec<f64> = vals.iter().map(|v| v.1).collect();
        let w2: Vec<f64> = vals.iter().map(|v| v.2).collect();
        let u_q: Vec<f64> = w.iter().zip(&w1).map(|(w, d)| d - phi * w).collect();
        let g: Vec<f64> = xs.iter().zip(&w).map(|(x, w)| (-phi * x).exp() * w).collect();
        let mut kinks = vec![false; xs.len()];
        for c in series.shifts() {
            if c < x_max {
                let i = locate(&xs, c);
                kinks[i] = true;
                kinks[i + 1] = true;
            }
        }
        validate(&xs, &w, &w1)?;
        let slopes = monotone_slopes(&xs, &w, &w1);
        let w3 = derivative_5pt(&xs, &w2);
        Ok(ScaleGrid {
            q,
            phi_q: phi,
            w0: 1.0 / delta,
            variation: model.variation(),
            xs,
            w,
            w1,
            w2,
            u_q,
            g,
            kinks,
            method,
            w3,
            slopes,
            series: Some(series),
        })
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Exponent `p` in `W(x) ≈ W(0+) + c·x^p` near the origin.
    fn head_exponent(&self) -> f64 {
        let (x0, x1) = (self.xs[0], self.xs[1]);
        let (d0, d1) = (self.w[0] - self.w0, self.w[1] - self.w0);
        if d0 > 0.0 && d1 > d0 {
            ((d1 / d0).ln() / (x1 / x0).ln()).clamp(0.05, 4.0)
        } else {
            1.0
        }
    }

    /// `W(x)` near the origin, below the first node.
    pub(crate) fn head(&self, x: f64) -> (f64, f64) {
        let p = self.head_exponent();
        let x0 = self.xs[0];
        let c = self.w[0] - self.w0;
        let r = (x / x0).powf(p);
        let w = self.w0 + c * r;
        let w1 = if x > 0.0 { p * c * r / x } else { f64::INFINITY };
        (w, w1)
    }

    /// `(W(x), W'(x))`; `W` vanishes on `x < 0` where `W'` is not reported.
    pub fn evaluate(&self, x: f64) -> Result<(f64, Option<f64>)> {
        if x < 0.0 {
            return Ok((0.0, None));
        }
        let x_max = self.x_max();
        if x > x_max * (1.0 + 1e-12) || !x.is_finite() {
            return Err(Error::Range { x, max: x_max });
        }
        if let Some(series) = &self.series {
            let (w, w1, _) = series.eval(x);
            return Ok((if x == 0.0 { self.w0 } else { w }, Some(w1)));
        }
        if x == 0.0 {
            let (_, d) = self.head(self.xs[0] * 1e-6);
            return Ok((self.w0, if self.head_exponent() >= 1.0 { Some(d) } else { None }));
        }
        if x < self.xs[0] {
            let (w, d) = self.head(x);
            return Ok((w, Some(d)));
        }
        let i = locate(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (w, _) = hermite(x0, x1, self.w[i], self.w[i + 1], self.slopes[i], self.slopes[i + 1], x);
        let (w1, _) = hermite(x0, x1, self.w1[i], self.w1[i + 1], self.w2[i], self.w2[i + 1], x);
        Ok((w, Some(w1)))
    }

    /// `W(x)` with the zero extension to negative arguments.
    pub fn w_at(&self, x: f64) -> Result<f64> {
        Ok(self.evaluate(x)?.0)
    }

    /// `W'(x)` for `x > 0`.
    pub fn w1_at(&self, x: f64) -> Result<f64> {
        match self.evaluate(x)?.1 {
            Some(d) => Ok(d),
            None => Err(Error::Domain(format!("W' is not defined at x = {x}"))),
        }
    }

    /// `W''(x)` for `x > 0`: cubic between nodes, with slopes from a
    /// five-point stencil, and held constant below the first node.
    pub fn w2_at(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || x > self.x_max() * (1.0 + 1e-12) {
            return Err(Error::Range { x, max: self.x_max() });
        }
        if let Some(series) = &self.series {
            return Ok(series.eval(x).2);
        }
        if x <= self.xs[0] {
            return Ok(self.w2[0]);
        }
        let i = locate(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        Ok(hermite(x0, x1, self.w2[i], self.w2[i + 1], self.w3[i], self.w3[i + 1], x).0)
    }

    /// CSV with a comment header carrying `q`, `Φ(q)` and the method id.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# q={:.16e},phi_q={:.16e},method={}",
            self.q,
            self.phi_q,
            self.method.id()
        )?;
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        wtr.write_record(["x", "W", "W1", "W2", "u_q"]).map_err(io)?;
        for i in 0..self.xs.len() {
            wtr.write_record([
                format!("{:.16e}", self.xs[i]),
                format!("{:.16e}", self.w[i]),
                format!("{:.16e}", self.w1[i]),
                format!("{:.16e}", self.w2[i]),
                format!("{:.16e}", self.u_q[i]),
            ])
            .map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn detect_kinks(w1: &[f64], w2: &[f64]) -> Vec<bool> {
    let mut flags = vec![false; w2.len()];
    let scale = w2.iter().chain(w1).fold(0.0f64, |m, v| m.max(v.abs()));
    let d: Vec<f64> = w2.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    for i in 1..d.len().saturating_sub(1) {
        if d[i] > 10.0 * d[i - 1].max(d[i + 1]) && d[i] > 1e-6 * scale {
            flags[i] = true;
            flags[i + 1] = true;
        }
    }
    flags
}

fn validate(xs: &[f64], w: &[f64], w1: &[f64]) -> Result<()> {
    let w1_scale = w1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..xs.len() {
        if !(w[i] > 0.0) || !w[i].is_finite() {
            return Err(Error::Inversion {
                x: xs[i],
                reason: format!("W = {:.6e} is not positive", w[i]),
            });
        }
        if w1[i] < -1e-6 * w1_scale || !w1[i].is_finite() {
            return Err(Error::Inversion {
                x: xs[i],
                reason: format!("W' = {:.6e} is negative", w1[i]),
            });
        }
        if i > 0 && w[i] < w[i - 1] * (1.0 - 1e-8) {
            return Err(Error::Inversion {
                x: xs[i],
                reason: format!("W decreases from {:.12e} to {:.12e}", w[i - 1], w[i]),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(x_max: f64) -> ScaleOptions {
        ScaleOptions {
            grid: GridSpec {
                points: 400,
                log_points: 60,
                x_max,
                ..GridSpec::default()
            },
            ..ScaleOptions::default()
        }
    }

    fn bm_w(q: f64, x: f64) -> f64 {
        if q == 0.0 {
            2.0 * x
        } else {
            let r = (2.0 * q).sqrt();
            2.0 / r * (r * x).sinh()
        }
    }

    #[test]
    fn brownian_matches_sinh() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        for q in [0.0, 0.5, 1.0] {
            let s = ScaleGrid::compute(&bm, q, &small_grid(10.0)).unwrap();
            for (x, w) in s.xs.iter().zip(&s.w) {
                let e = bm_w(q, *x);
                assert!((w - e).abs() <= 1e-8 * e, "q={q} x={x}: {w} vs {e}");
            }
        }
        let s = ScaleGrid::compute(&bm, 0.5, &small_grid(10.0)).unwrap();
        assert!((s.w_at(1.0).unwrap() - 2.0 * 1f64.sinh()).abs() < 1e-8);
    }

    #[test]
    fn bounded_variation_starts_at_one_over_delta() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        let s = ScaleGrid::compute(&cl, 0.1, &small_grid(10.0)).unwrap();
        assert!((s.w[0] - 1.0).abs() < 1e-3);
        assert!((s.w_at(0.0).unwrap() - 1.0).abs() < 1e-15);
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let s = ScaleGrid::compute(&bm, 0.1, &small_grid(10.0)).unwrap();
        assert!(s.w[0] < 1e-3);
    }

    #[test]
    fn evaluation_edges() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let s = ScaleGrid::compute(&bm, 0.5, &small_grid(5.0)).unwrap();
        assert_eq!(s.evaluate(-1.0).unwrap(), (0.0, None));
        assert!(matches!(s.evaluate(6.0), Err(Error::Range { .. })));
        let i = 123;
        let (w, d) = s.evaluate(s.xs[i]).unwrap();
        assert_eq!(w, s.w[i]);
        assert_eq!(d.unwrap(), s.w1[i]);
    }

    #[test]
    fn talbot_and_direct_agree_with_tilted() {
        let cl = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        let base = ScaleGrid::compute(&cl, 0.1, &small_grid(5.0)).unwrap();
        let mut opts = small_grid(5.0);
        opts.method.route = Route::Direct;
        let direct = ScaleGrid::compute(&cl, 0.1, &opts).unwrap();
        opts.method = Method {
            algorithm: Algorithm::FixedTalbot { nodes: 24 },
            route: Route::Tilted,
        };
        let talbot = ScaleGrid::compute(&cl, 0.1, &opts).unwrap();
        for i in 0..base.xs.len() {
            let x = base.xs[i];
            if x < 0.1 {
                continue;
            }
            assert!((base.w[i] - direct.w[i]).abs() < 1e-6 * base.w[i]);
            assert!((base.w[i] - talbot.w[i]).abs() < 1e-6 * base.w[i]);
        }
        let pw = LevyModel::new(
            1.0,
            0.0,
            JumpMeasure::PiecewisePower(crate::levy::PiecewisePower::new(1.5, 0.5, 1.0).unwrap()),
        )
        .unwrap();
        assert!(ScaleGrid::compute(&pw, 0.1, &opts).is_err());
    }

    #[test]
    fn csv_has_header_and_columns() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        let s = ScaleGrid::compute(&bm, 0.5, &small_grid(5.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("# q=5.0000000000000000e-1,phi_q=1.0000000000000000e0"));
        assert_eq!(lines.next().unwrap(), "x,W,W1,W2,u_q");
        assert_eq!(text.lines().count(), 2 + s.xs.len());
    }
}
