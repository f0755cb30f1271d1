//! Reference computations used as oracles: closed forms and plain adaptive
//! quadrature, written without the library's numerical machinery.
#![allow(dead_code)]

use std::io::Write;

use snlevy::{JumpMeasure, LevyModel};

/// One status line on the real stdout, visible even when the harness
/// captures test output.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Adaptive Simpson to absolute tolerance `tol`, or to a relative `1e-14`
/// of the panel value when that is larger.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-14 * (left + right).abs()) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Sum of adaptive Simpson over consecutive breakpoints.
pub fn simpson_breaks<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> f64 {
    points.windows(2).map(|w| simpson(f, w[0], w[1], tol)).sum()
}

/// `∫_a^∞ f` through `y = a + t/(1-t)`.
pub fn simpson_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        let t = t.min(1.0 - 1e-9);
        let s = 1.0 - t;
        f(a + t / s) / (s * s)
    };
    simpson(&g, 0.0, 1.0, tol)
}

/// `1 - e^{-y} - y` without cancellation.
fn defect(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        let y2 = y * y;
        -y2 / 2.0 + y2 * y / 6.0 - y2 * y2 / 24.0 + y2 * y2 * y / 120.0
    } else {
        -(-y).exp_m1() - y
    }
}

/// `∫(1 - e^{-θx} - θx 1{x<1}) Π(dx)` by quadrature on the density.
pub fn jump_part(jumps: &JumpMeasure, theta: f64) -> f64 {
    match jumps {
        JumpMeasure::None => 0.0,
        JumpMeasure::Atoms(atoms) => atoms
            .iter()
            .map(|a| {
                let y = theta * a.location;
                let comp = if a.location < 1.0 { y } else { 0.0 };
                a.mass * (-(-y).exp_m1() - comp)
            })
            .sum(),
        _ => {
            let dens = |x: f64| jumps.density(x).unwrap_or(0.0);
            let breaks = jumps.breakpoints();
            // x = t² on (0, 1], x = 1/t² on [1, ∞).
            let small = |t: f64| {
                let t = t.max(1e-9);
                let x = t * t;
                2.0 * t * defect(theta * x) * dens(x)
            };
            let large = |t: f64| {
                let t = t.max(1e-9);
                let x = 1.0 / (t * t);
                2.0 * (-(-theta * x).exp_m1()) * dens(x) / (t * t * t)
            };
            let mut sp = vec![0.0];
            sp.extend(breaks.iter().filter(|&&b| b > 0.0 && b < 1.0).map(|b| b.sqrt()));
            sp.push(1.0);
            let mut lp = vec![0.0];
            let mut big: Vec<f64> = breaks
                .iter()
                .filter(|&&b| b > 1.0 && b.is_finite())
                .map(|b| 1.0 / b.sqrt())
                .collect();
            big.sort_by(f64::total_cmp);
            lp.extend(big);
            lp.push(1.0);
            simpson_breaks(&small, &sp, 1e-14) + simpson_breaks(&large, &lp, 1e-14)
        }
    }
}

/// Laplace exponent from the model's parameters and jump density.
pub fn psi(model: &LevyModel, theta: f64) -> f64 {
    let s = model.sigma();
    model.gamma() * theta + 0.5 * s * s * theta * theta - jump_part(model.jumps(), theta)
}

/// Right inverse of `psi` by bracketing and bisection.
pub fn phi(model: &LevyModel, q: f64) -> f64 {
    let f = |t: f64| psi(model, t) - q;
    if q == 0.0 && f(1e-7) > 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 0.01;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 1.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `κ̂(q,θ) = (q - ψ(θ))/(Φ(q) - θ)`, differentiated at the removable point.
pub fn ladder_ratio(model: &LevyModel, q: f64, theta: f64) -> f64 {
    let p = phi(model, q);
    if (theta - p).abs() < 1e-4 {
        let h = 1e-4;
        (psi(model, p + h) - psi(model, p - h)) / (2.0 * h)
    } else {
        (q - psi(model, theta)) / (p - theta)
    }
}

/// `υ_q(x) = ∫_0^∞ e^{-pu} π(x+u) du` with `p = Φ(q)`.
pub fn upsilon_density(model: &LevyModel, p: f64, x: f64) -> f64 {
    let jumps = model.jumps();
    let f = |u: f64| (-p * u).exp() * jumps.density(x + u).unwrap_or(0.0);
    let mut pts = vec![0.0];
    pts.extend(
        jumps
            .breakpoints()
            .into_iter()
            .filter(|&b| b > x && b.is_finite())
            .map(|b| b - x),
    );
    let last = *pts.last().unwrap();
    let scale = f(0.0).abs().max(1e-300);
    simpson_breaks(&f, &pts, 1e-13 * scale) + simpson_to_inf(&f, last, 1e-13 * scale)
}

/// Brownian motion `ψ(θ) = θ²/2`: `(W, W', W'')`.
pub fn brownian_w(q: f64, x: f64) -> (f64, f64, f64) {
    if q == 0.0 {
        return (2.0 * x, 2.0, 0.0);
    }
    let r = (2.0 * q).sqrt();
    (2.0 * (r * x).sinh() / r, 2.0 * (r * x).cosh(), 2.0 * r * (r * x).sinh())
}

/// Cramér–Lundberg with premium `c`, rate `λ`, exponential claims of mean `1/μ`.
#[derive(Debug, Clone, Copy)]
pub struct ClosedCl {
    pub c: f64,
    pub mu: f64,
    /// `Φ(q)` and the negative root of `ψ(θ) = q`.
    pub t1: f64,
    pub t2: f64,
}

impl ClosedCl {
    pub fn new(c: f64, lambda: f64, mu: f64, q: f64) -> Self {
        let b = c * mu - lambda - q;
        let disc = (b * b + 4.0 * c * q * mu).sqrt();
        ClosedCl {
            c,
            mu,
            t1: (-b + disc) / (2.0 * c),
            t2: (-b - disc) / (2.0 * c),
        }
    }

    fn coeffs(&self) -> (f64, f64) {
        let d = self.c * (self.t1 - self.t2);
        ((self.t1 + self.mu) / d, -(self.t2 + self.mu) / d)
    }

    /// `W^{(k)}(x)` for `k = 0, 1, 2`.
    pub fn w(&self, k: i32, x: f64) -> f64 {
        let (a, b) = self.coeffs();
        a * self.t1.powi(k) * (self.t1 * x).exp() + b * self.t2.powi(k) * (self.t2 * x).exp()
    }

    /// `W' - ΦW`, which reduces to the decaying exponential.
    pub fn u(&self, x: f64) -> f64 {
        (self.t2 + self.mu) * (self.t2 * x).exp() / self.c
    }

    /// Root of `W'' = 0`, or 0 when `W'` increases from the start.
    pub fn a_star(&self) -> f64 {
        let (a, b) = self.coeffs();
        let r = -(b * self.t2 * self.t2) / (a * self.t1 * self.t1);
        if r <= 1.0 {
            0.0
        } else {
            r.ln() / (self.t1 - self.t2)
        }
    }

    /// Value of the barrier strategy at level `a`.
    pub fn barrier_value(&self, a: f64, x: f64) -> f64 {
        let d = self.w(1, a);
        if x <= a {
            self.w(0, x) / d
        } else {
            x - a + self.w(0, a) / d
        }
    }
}

/// `(Γ - q)f(x)` for a bounded-variation model with drift `δ` and finite
/// jump density, with `f = 0` on `(-∞, 0)` and kink points of `f` listed.
pub fn bv_generator<F, G>(model: &LevyModel, q: f64, f: F, f1: G, kinks: &[f64], x: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let delta = model.bv_drift().expect("bounded variation");
    let jumps = model.jumps();
    let dens = |y: f64| jumps.density(y).unwrap_or(0.0);
    let fx = f(x);
    let inner = |y: f64| (f(x - y) - fx) * dens(y);
    let mut pts = vec![0.0, x];
    for &k in kinks {
        if x - k > 0.0 && x - k < x {
            pts.push(x - k);
        }
    }
    for b in jumps.breakpoints() {
        if b > 0.0 && b < x {
            pts.push(b);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = fx.abs().max(1e-300);
    let body = simpson_breaks(&inner, &pts, 1e-13 * scale);
    let mut tail_pts = vec![x];
    tail_pts.extend(jumps.breakpoints().into_iter().filter(|&b| b > x && b.is_finite()));
    let last = *tail_pts.last().unwrap();
    let mass = simpson_breaks(&dens, &tail_pts, 1e-14) + simpson_to_inf(&dens, last, 1e-14);
    delta * f1(x) + body - fx * mass - q * fx
}

/// `∫_0^∞ e^{-θx} W(x) dx` from values on a grid: Gauss–Legendre on each
/// cell, a power-law fit below the first node and a two-term tail beyond
/// the last.
pub fn laplace_of_grid<F: Fn(f64) -> f64>(xs: &[f64], w: &F, w0: f64, w1_end: f64, theta: f64, phi_q: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let x0 = xs[0];
    let (wa, wb) = (w(x0) - w0, w(2.0 * x0) - w0);
    let p = if wa > 0.0 && wb > 0.0 { (wb / wa).log2() } else { 1.0 };
    let head = x0 * w0 + x0 * wa / (p + 1.0);
    let mut body = 0.0;
    for c in xs.windows(2) {
        let (a, b) = (c[0], c[1]);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for k in 0..5 {
            let x = m + h * NODES[k];
            body += WEIGHTS[k] * h * (-theta * x).exp() * w(x);
        }
    }
    let xe = *xs.last().unwrap();
    let beta = theta - phi_q;
    let g = (-phi_q * xe).exp() * w(xe);
    let g1 = (-phi_q * xe).exp() * (w1_end - phi_q * w(xe));
    let tail = (-beta * xe).exp() * (g / beta + g1 / (beta * beta));
    head + body + tail
}

/// Largest scaled second-difference violation of convexity (`sign = 1`)
/// or concavity (`sign = -1`) on nodes inside `[lo, hi]`.
pub fn convexity_excess(xs: &[f64], f: &[f64], lo: f64, hi: f64, sign: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..xs.len() - 1 {
        if xs[i - 1] < lo || xs[i + 1] > hi {
            continue;
        }
        let t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
        let chord = (1.0 - t) * f[i - 1] + t * f[i + 1];
        let scale = f[i - 1]
            .abs()
            .max(f[i].abs())
            .max(f[i + 1].abs())
            .max(f64::MIN_POSITIVE);
        worst = worst.max(sign * 2.0 * (f[i] - chord) / scale);
    }
    worst
}

/// Largest relative rise of `f` between neighbouring nodes in `[lo, hi]`.
pub fn rise_excess(xs: &[f64], f: &[f64], lo: f64, hi: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..xs.len() - 1 {
        if xs[i] < lo || xs[i + 1] > hi {
            continue;
        }
        let scale = f[i].abs().max(f[i + 1].abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((f[i + 1] - f[i]) / scale);
    }
    worst
}

/// Geometric grid of `n` points on `[a, b]`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| a * (r * i as f64).exp()).collect()
}
