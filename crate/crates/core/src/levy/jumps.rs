//! Jump measures of the process, stored on the positive half-line (the
//! process jumps by `-x` when the measure charges `x`).
//!
//! Every family exposes its jump integral
//! `J(θ) = ∫ (1 - e^{-θx} - θx·1{x<1}) Π(dx)` in closed form for complex `θ`
//! with `Re θ ≥ 0`; this is what the Laplace inversion consumes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::quad::Quad;
use crate::numeric::special::{exp_integral_segment, expint_p, gamma, x_exp_integral_segment};

/// Piece of a density of the form `exp(log_amp + slope·x)` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSegment {
    pub lo: f64,
    pub hi: f64,
    pub log_amp: f64,
    pub slope: f64,
}

impl ExpSegment {
    fn amp(&self) -> f64 {
        self.log_amp.exp()
    }

    fn density(&self, x: f64) -> f64 {
        (self.log_amp + self.slope * x).exp()
    }

    /// `∫_{lo}^{hi} e^{-s x} π(x) dx`
    fn laplace(&self, s: Complex64) -> Complex64 {
        exp_integral_segment(s - self.slope, self.lo, self.hi) * self.amp()
    }

    fn mass_from(&self, x: f64) -> f64 {
        let l = self.lo.max(x);
        if l >= self.hi {
            return 0.0;
        }
        (exp_integral_segment(Complex64::new(-self.slope, 0.0), l, self.hi) * self.amp()).re
    }

    fn first_moment(&self) -> f64 {
        (x_exp_integral_segment(Complex64::new(-self.slope, 0.0), self.lo, self.hi) * self.amp()).re
    }
}

/// Density that is exponential-linear on consecutive segments covering
/// `(0, ∞)`. Covers exponential claims, the kinked gallery density and
/// log-linearly interpolated tables.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExp {
    segments: Vec<ExpSegment>,
}

impl PiecewiseExp {
    pub fn new(segments: Vec<ExpSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidModel(
                "piecewise-exponential density needs at least one segment".into(),
            ));
        }
        if segments[0].lo != 0.0 {
            return Err(Error::InvalidModel("first segment must start at 0".into()));
        }
        for w in segments.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::InvalidModel("segments must be contiguous".into()));
            }
        }
        for s in &segments {
            if !(s.hi > s.lo) || !s.log_amp.is_finite() || !s.slope.is_finite() {
                return Err(Error::InvalidModel(format!("malformed segment {s:?}")));
            }
        }
        let last = segments.last().unwrap();
        if last.hi.is_finite() {
            return Err(Error::InvalidModel("last segment must extend to infinity".into()));
        }
        if last.slope >= 0.0 {
            return Err(Error::InvalidModel(
                "density must decay exponentially in the far tail".into(),
            ));
        }
        // put a break at x = 1 so the compensator splits on segment boundaries
        let mut split = Vec::with_capacity(segments.len() + 1);
        for s in segments {
            if s.lo < 1.0 && s.hi > 1.0 {
                split.push(ExpSegment { hi: 1.0, ..s });
                split.push(ExpSegment { lo: 1.0, ..s });
            } else {
                split.push(s);
            }
        }
        Ok(PiecewiseExp { segments: split })
    }

    /// Exponential claims at rate `lambda` with mean `1/mu`: `π(x) = λμe^{-μx}`.
    pub fn exponential(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0) {
            return Err(Error::InvalidModel(
                "exponential claims need lambda > 0 and mu > 0".into(),
            ));
        }
        PiecewiseExp::new(vec![ExpSegment {
            lo: 0.0,
            hi: f64::INFINITY,
            log_amp: (lambda * mu).ln(),
            slope: -mu,
        }])
    }

    /// `π = scale·e^{2-x}` on `(0, α)` and `scale·e^{1-λx}` on `[α, ∞)` with
    /// `α = 1/(1-λ)`, `0 < λ < 1`.
    pub fn kinked(lambda: f64, scale: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidModel("piecewise_exp needs 0 < lambda < 1".into()));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidModel("piecewise_exp needs scale > 0".into()));
        }
        let alpha = 1.0 / (1.0 - lambda);
        PiecewiseExp::new(vec![
            ExpSegment {
                lo: 0.0,
                hi: alpha,
                log_amp: 2.0 + scale.ln(),
                slope: -1.0,
            },
            ExpSegment {
                lo: alpha,
                hi: f64::INFINITY,
                log_amp: 1.0 + scale.ln(),
                slope: -lambda,
            },
        ])
    }

    /// Log-linear interpolation through `(x_i, π_i)`, extended log-linearly
    /// from the first and last panels.
    pub fn from_table(xs: &[f64], values: &[f64]) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 2 {
            return Err(Error::InvalidModel(
                "density table needs at least two (x, pi) rows".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidModel(
                    "density table x column must be strictly increasing".into(),
                ));
            }
        }
        if xs[0] <= 0.0 {
            return Err(Error::InvalidModel("density table x values must be positive".into()));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidModel(
                "density table values must be positive and finite".into(),
            ));
        }
        let n = xs.len();
        let slope_of = |i: usize| (values[i + 1].ln() - values[i].ln()) / (xs[i + 1] - xs[i]);
        let mut segments = Vec::with_capacity(n + 1);
        let mut lo = 0.0;
        for i in 0..n - 1 {
            let b = slope_of(i);
            let a = values[i].ln() - b * xs[i];
            let hi = if i == n - 2 { f64::INFINITY } else { xs[i + 1] };
            segments.push(ExpSegment {
                lo,
                hi,
                log_amp: a,
                slope: b,
            });
            lo = hi;
        }
        PiecewiseExp::new(segments)
    }

    pub fn segments(&self) -> &[ExpSegment] {
        &self.segments
    }

    fn segment_at(&self, x: f64) -> &ExpSegment {
        let i = self.segments.partition_point(|s| s.hi <= x);
        &self.segments[i.min(self.segments.len() - 1)]
    }

    pub fn density(&self, x: f64) -> f64 {
        self.segment_at(x).density(x)
    }

    pub fn tail(&self, x: f64) -> f64 {
        self.segments.iter().map(|s| s.mass_from(x)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.tail(0.0)
    }

    fn jump_integral(&self, theta: Complex64) -> Complex64 {
        let mut small_moment = 0.0;
        for s in &self.segments {
            if s.hi <= 1.0 {
                small_moment += s.first_moment();
            }
        }
        self.uncompensated(theta) - theta * small_moment
    }

    /// `∫ (1 - e^{-θx}) π(x) dx`.
    fn uncompensated(&self, theta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut i = 0;
        while i < self.segments.len() {
            let mut merged = self.segments[i];
            while i + 1 < self.segments.len()
                && self.segments[i + 1].slope == merged.slope
                && self.segments[i + 1].log_amp == merged.log_amp
            {
                i += 1;
                merged.hi = self.segments[i].hi;
            }
            acc += merged.laplace(Complex64::new(0.0, 0.0)) - merged.laplace(theta);
            i += 1;
        }
        acc
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }
}

/// `π(x) = scale·x^{-(1+λ₁)}` on `(0,1)`, `scale·x^{-(1+λ₂)}` on `[1,∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewisePower {
    pub lambda1: f64,
    pub lambda2: f64,
    pub scale: f64,
}

impl PiecewisePower {
    pub fn new(lambda1: f64, lambda2: f64, scale: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda1 < 2.0) {
            return Err(Error::InvalidModel(
                "piecewise_power needs 0 < lambda1 < 2 for ∫(1∧x²)Π(dx) < ∞".into(),
            ));
        }
        if !(lambda2 > 0.0) {
            return Err(Error::InvalidModel("piecewise_power needs lambda2 > 0".into()));
        }
        for l in [lambda1, lambda2] {
            if (l - l.round()).abs() < 1e-6 {
                return Err(Error::InvalidModel(format!(
                    "piecewise_power exponents must be non-integer (got {l})"
                )));
            }
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidModel("piecewise_power needs scale > 0".into()));
        }
        Ok(PiecewisePower {
            lambda1,
            lambda2,
            scale,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        let e = if x < 1.0 { self.lambda1 } else { self.lambda2 };
        self.scale * x.powf(-1.0 - e)
    }

    pub fn tail(&self, x: f64) -> f64 {
        let (a, b) = (self.lambda1, self.lambda2);
        if x < 1.0 {
            self.scale * ((x.powf(-a) - 1.0) / a + 1.0 / b)
        } else {
            self.scale * x.powf(-b) / b
        }
    }

    fn jump_integral(&self, theta: Complex64) -> Result<Complex64> {
        let (a, b) = (self.lambda1, self.lambda2);
        let small = -theta.powf(a) * gamma(-a) - 1.0 / a + theta / (a - 1.0) + expint_p(1.0 + a, theta)?;
        let large = Complex64::new(1.0 / b, 0.0) - expint_p(1.0 + b, theta)?;
        Ok((small + large) * self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    None,
    Density,
    Atoms,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpMeasure {
    None,
    PiecewiseExp(PiecewiseExp),
    PiecewisePower(PiecewisePower),
    Atoms(Vec<Atom>),
}

impl JumpMeasure {
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidModel(
                "atomic jump measure needs at least one atom".into(),
            ));
        }
        if atoms.iter().any(|a| !(a.location > 0.0 && a.mass > 0.0)) {
            return Err(Error::InvalidModel("atoms need positive location and mass".into()));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(JumpMeasure::Atoms(atoms))
    }

    pub fn kind(&self) -> JumpKind {
        match self {
            JumpMeasure::None => JumpKind::None,
            JumpMeasure::Atoms(_) => JumpKind::Atoms,
            _ => JumpKind::Density,
        }
    }

    /// Lévy density `π(x)`; `None` for atomic measures.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            JumpMeasure::None => Some(0.0),
            JumpMeasure::PiecewiseExp(p) => Some(p.density(x)),
            JumpMeasure::PiecewisePower(p) => Some(p.density(x)),
            JumpMeasure::Atoms(_) => None,
        }
    }

    /// `Π̄(x) = Π(x, ∞)`.
    pub fn tail(&self, x: f64) -> f64 {
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::PiecewiseExp(p) => p.tail(x),
            JumpMeasure::PiecewisePower(p) => p.tail(x),
            JumpMeasure::Atoms(atoms) => atoms.iter().filter(|a| a.location > x).map(|a| a.mass).sum(),
        }
    }

    /// `Π(0, ∞)`, infinite for infinite activity.
    pub fn total_mass(&self) -> f64 {
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::PiecewiseExp(p) => p.total_mass(),
            JumpMeasure::PiecewisePower(_) => f64::INFINITY,
            JumpMeasure::Atoms(atoms) => atoms.iter().map(|a| a.mass).sum(),
        }
    }

    /// `∫_{(0,1)} x Π(dx)`.
    pub fn small_moment(&self) -> f64 {
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::PiecewiseExp(p) => p
                .segments
                .iter()
                .filter(|s| s.hi <= 1.0)
                .map(|s| s.first_moment())
                .sum(),
            JumpMeasure::PiecewisePower(p) => {
                if p.lambda1 < 1.0 {
                    p.scale / (1.0 - p.lambda1)
                } else {
                    f64::INFINITY
                }
            }
            JumpMeasure::Atoms(atoms) => atoms
                .iter()
                .filter(|a| a.location < 1.0)
                .map(|a| a.mass * a.location)
                .sum(),
        }
    }

    /// `∫_{[1,∞)} x Π(dx)`.
    pub fn large_moment(&self) -> f64 {
        match self {
            JumpMeasure::None => 0.0,
            JumpMeasure::PiecewiseExp(p) => p
                .segments
                .iter()
                .filter(|s| s.lo >= 1.0)
                .map(|s| s.first_moment())
                .sum(),
            JumpMeasure::PiecewisePower(p) => {
                if p.lambda2 > 1.0 {
                    p.scale / (p.lambda2 - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            JumpMeasure::Atoms(atoms) => atoms
                .iter()
                .filter(|a| a.location >= 1.0)
                .map(|a| a.mass * a.location)
                .sum(),
        }
    }

    /// Closed-form `J(θ) = ∫ (1 - e^{-θx} - θx·1{x<1}) Π(dx)` for `Re θ ≥ 0`.
    pub fn jump_integral(&self, theta: Complex64) -> Result<Complex64> {
        match self {
            JumpMeasure::None => Ok(Complex64::new(0.0, 0.0)),
            JumpMeasure::PiecewiseExp(p) => Ok(p.jump_integral(theta)),
            JumpMeasure::PiecewisePower(p) => p.jump_integral(theta),
            JumpMeasure::Atoms(atoms) => Ok(atoms
                .iter()
                .map(|a| {
                    let comp = if a.location < 1.0 {
                        theta * a.location
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    (Complex64::new(1.0, 0.0) - (-theta * a.location).exp() - comp) * a.mass
                })
                .sum()),
        }
    }

    /// `∫ (1 - e^{-θx}) Π(dx)` without compensation; `None` when the total
    /// mass is infinite.
    pub fn finite_integral(&self, theta: Complex64) -> Option<Complex64> {
        match self {
            JumpMeasure::None => Some(Complex64::new(0.0, 0.0)),
            JumpMeasure::PiecewiseExp(p) => p.total_mass().is_finite().then(|| p.uncompensated(theta)),
            JumpMeasure::PiecewisePower(_) => None,
            JumpMeasure::Atoms(atoms) => Some(
                atoms
                    .iter()
                    .map(|a| (Complex64::new(1.0, 0.0) - (-theta * a.location).exp()) * a.mass)
                    .sum(),
            ),
        }
    }

    /// Points where the density (or tail) is not smooth, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            JumpMeasure::None => vec![],
            JumpMeasure::PiecewiseExp(p) => p.breakpoints(),
            JumpMeasure::PiecewisePower(_) => vec![1.0],
            JumpMeasure::Atoms(atoms) => atoms.iter().map(|a| a.location).collect(),
        }
    }

    /// Same jump integral by direct adaptive quadrature of the density, for
    /// real `θ ≥ 0`. Independent of the closed forms above.
    pub fn jump_integral_quadrature(&self, theta: f64, quad: &Quad) -> Result<f64> {
        if matches!(self, JumpMeasure::Atoms(_) | JumpMeasure::None) {
            return Ok(self.jump_integral(Complex64::new(theta, 0.0))?.re);
        }
        let integrand = |x: f64| {
            let z = theta * x;
            let core = if x >= 1.0 {
                -(-z).exp_m1()
            } else if z < 1e-3 {
                // 1 - e^{-z} - z = -z²/2 + z³/6 - z⁴/24 + ...
                -z * z * (0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0)
            } else {
                -(-z).exp_m1() - z
            };
            core * self.density(x).unwrap_or(0.0)
        };
        let mut breaks: Vec<f64> = self.breakpoints().into_iter().filter(|&b| b < 1.0).collect();
        breaks.insert(0, 0.0);
        breaks.push(1.0);
        let first = breaks[1];
        let mut total = quad.integrate_sqrt_left(integrand, 0.0, first)?.value;
        total += quad.integrate_breaks(integrand, &breaks[1..])?.value;
        let mut tail_breaks: Vec<f64> = self.breakpoints().into_iter().filter(|&b| b > 1.0).collect();
        tail_breaks.insert(0, 1.0);
        total += quad.integrate_breaks(integrand, &tail_breaks)?.value;
        let last = *tail_breaks.last().unwrap();
        total += match self {
            JumpMeasure::PiecewisePower(_) => quad.integrate_to_inf_algebraic(integrand, last)?.value,
            _ => quad.integrate_to_inf(integrand, last, 1.0)?.value,
        };
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Quad {
        Quad::with_tolerances(1e-12, 1e-15)
    }

    #[test]
    fn exponential_tail_and_jump_integral() {
        let m = JumpMeasure::PiecewiseExp(PiecewiseExp::exponential(1.0, 2.0).unwrap());
        assert!((m.tail(1.0) - (-2.0f64).exp()).abs() < 1e-15);
        // J(θ) + θ·∫_0^1 xπ = λθ/(μ+θ)
        let th = 3.0;
        let j = m.jump_integral(Complex64::new(th, 0.0)).unwrap().re;
        assert!((j + th * m.small_moment() - 3.0 / 5.0).abs() < 1e-14);
        assert!((m.small_moment() + m.large_moment() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let models = [
            JumpMeasure::PiecewiseExp(PiecewiseExp::exponential(1.0, 2.0).unwrap()),
            JumpMeasure::PiecewiseExp(PiecewiseExp::kinked(0.5, 1.0).unwrap()),
            JumpMeasure::PiecewisePower(PiecewisePower::new(1.5, 0.5, 1.0).unwrap()),
            JumpMeasure::PiecewisePower(PiecewisePower::new(0.5, 1.5, 0.3).unwrap()),
        ];
        for m in &models {
            for &th in &[0.05, 0.5, 1.0, 2.7, 10.0] {
                let a = m.jump_integral(Complex64::new(th, 0.0)).unwrap();
                let b = m.jump_integral_quadrature(th, &q()).unwrap();
                assert!(a.im.abs() < 1e-14);
                assert!(
                    (a.re - b).abs() < 1e-9 * b.abs().max(1.0),
                    "{m:?} θ={th}: {} vs {b}",
                    a.re
                );
            }
        }
    }

    #[test]
    fn power_tail_closed_form() {
        let p = PiecewisePower::new(1.5, 0.5, 1.0).unwrap();
        // ∫_2^∞ y^{-1.5} dy = 2·2^{-1/2}
        assert!((p.tail(2.0) - 2.0 * 2f64.powf(-0.5)).abs() < 1e-14);
        let quad = q();
        let num = quad.integrate(|y| p.density(y), 0.3, 1.0).unwrap().value + p.tail(1.0);
        assert!((num - p.tail(0.3)).abs() < 1e-10);
    }

    #[test]
    fn table_reproduces_exponential() {
        let xs: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x| 2.0 * (-2.0 * x).exp()).collect();
        let t = PiecewiseExp::from_table(&xs, &vs).unwrap();
        let e = PiecewiseExp::exponential(1.0, 2.0).unwrap();
        for &x in &[0.01, 0.6, 1.0, 3.3, 9.0] {
            assert!((t.density(x) - e.density(x)).abs() < 1e-13);
            assert!((t.tail(x) - e.tail(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn table_rejects_growing_tail() {
        assert!(PiecewiseExp::from_table(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(PiecewiseExp::from_table(&[1.0, 1.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn kinked_density_is_continuous_at_alpha() {
        let p = PiecewiseExp::kinked(0.5, 1.0).unwrap();
        assert!((p.density(2.0 - 1e-12) - p.density(2.0)).abs() < 1e-10);
        assert!((p.density(2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn atoms_tail_is_right_open() {
        let m = JumpMeasure::atoms(vec![Atom {
            location: 1.0,
            mass: 0.5,
        }])
        .unwrap();
        assert_eq!(m.tail(0.999), 0.5);
        assert_eq!(m.tail(1.0), 0.0);
        assert!(m.density(0.5).is_none());
    }
}
