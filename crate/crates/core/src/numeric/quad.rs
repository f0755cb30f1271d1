//! Globally adaptive Gauss–Kronrod (7/15 point) quadrature.
//!
//! The routine keeps a max-heap of panels ordered by their error estimate and
//! bisects the worst panel until the summed error meets
//! `max(abs_tol, rel_tol * |I|)`. Values may be real or complex; anything
//! implementing [`QuadValue`] works.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Quad {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 4000,
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.magnitude() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err, floor)
}

impl Quad {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Quad {
            rel_tol,
            abs_tol,
            ..Quad::default()
        }
    }

    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> Result<Estimate<T>> {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrate over `[points[0], points[last]]`, seeding panels at every
    /// interior break point. Points must be non-decreasing; empty panels are
    /// skipped.
    pub fn integrate_breaks<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, points: &[f64]) -> Result<Estimate<T>> {
        let mut heap = BinaryHeap::new();
        let mut total = T::zero();
        let mut total_err = 0.0;
        let mut total_floor = 0.0;
        let mut evals = 0;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let (v, e, fl) = kronrod(&f, a, b);
            evals += 15;
            total = total + v;
            total_err += e;
            total_floor += fl;
            heap.push(Panel {
                a,
                b,
                value: v,
                error: e,
                floor: fl,
            });
        }
        loop {
            if !total.is_finite_value() {
                return Err(Error::Domain("non-finite integrand value".into()));
            }
            let tol = self.abs_tol.max(self.rel_tol * total.magnitude());
            // the rounding floor cannot be refined away
            if total_err <= tol || total_err <= 2.0 * total_floor {
                break;
            }
            if heap.len() >= self.max_panels {
                return Err(Error::Quadrature {
                    achieved: total_err,
                    requested: tol,
                });
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // panel at floating-point resolution; accept what we have
                heap.push(worst);
                let tol = self.abs_tol.max(self.rel_tol * total.magnitude());
                if total_err <= 1e3 * tol {
                    break;
                }
                return Err(Error::Quadrature {
                    achieved: total_err,
                    requested: tol,
                });
            }
            let (v1, e1, f1) = kronrod(&f, worst.a, mid);
            let (v2, e2, f2) = kronrod(&f, mid, worst.b);
            evals += 30;
            total = total - worst.value + v1 + v2;
            total_err += e1 + e2 - worst.error;
            total_floor += f1 + f2 - worst.floor;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
                floor: f1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
                floor: f2,
            });
        }
        // re-sum to shed accumulated cancellation in the running total
        let mut value = T::zero();
        let mut error = 0.0;
        for p in heap.iter() {
            value = value + p.value;
            error += p.error;
        }
        Ok(Estimate { value, error, evals })
    }

    /// `∫_a^∞ f`, through the map `x = a + s·t/(1-t)` on `t ∈ (0,1)`.
    pub fn integrate_to_inf<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, scale: f64) -> Result<Estimate<T>> {
        let g = |t: f64| {
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            if !x.is_finite() {
                return T::zero();
            }
            let v = f(x);
            if v.magnitude() == 0.0 {
                return T::zero();
            }
            v * (scale / (one_minus * one_minus))
        };
        self.integrate(g, 0.0, 1.0)
    }

    /// `∫_a^∞ f` for algebraically decaying integrands, through `x = a/u²`
    /// (`a > 0`), which turns an `x^{-3/2}` tail into a constant.
    pub fn integrate_to_inf_algebraic<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64) -> Result<Estimate<T>> {
        let g = |u: f64| {
            if u <= 0.0 {
                return T::zero();
            }
            let x = a / (u * u);
            if !x.is_finite() {
                return T::zero();
            }
            f(x) * (2.0 * a / (u * u * u))
        };
        self.integrate(g, 0.0, 1.0)
    }

    /// `∫_a^b f` for integrands with an integrable algebraic singularity at
    /// `a`, through `x = a + (b-a)u²`.
    pub fn integrate_sqrt_left<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> Result<Estimate<T>> {
        let len = b - a;
        let g = |u: f64| f(a + len * u * u) * (2.0 * len * u);
        self.integrate(g, 0.0, 1.0)
    }

    /// Convenience wrapper returning only the value.
    pub fn value<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        Ok(self.integrate(f, a, b)?.value)
    }
}

/// Fixed-order Gauss–Legendre rule on `[a,b]` (used where the integrand is a
/// known low-degree piecewise polynomial).
pub fn gauss_legendre_5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    X.iter().zip(W.iter()).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
