//! The generator of `X` acting on twice differentiable functions,
//!
//! `Γf(x) = γf'(x) + (σ²/2)f''(x) + ∫_(0,∞) [f(x-y) - f(x) + y f'(x) 1{y<1}] Π(dy)`,
//!
//! with the compensator cutoff matching the Laplace exponent.

use crate::error::{Error, Result};
use crate::levy::{JumpMeasure, LevyModel};
use crate::numeric::quad::{gauss_legendre_5, Quad};
use crate::scale::ScaleGrid;

/// A function known through its value and first two derivatives.
pub trait TestFunction: Sync {
    /// `f(x)` for every real `x`, including the negative half-line.
    fn value(&self, x: f64) -> Result<f64>;
    fn d1(&self, x: f64) -> Result<f64>;
    fn d2(&self, x: f64) -> Result<f64>;
    /// Points where `f''` may jump.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Closed-form test function from a closure returning `(f, f', f'')`.
pub struct Analytic<F>(pub F);

impl<F: Fn(f64) -> (f64, f64, f64) + Sync> TestFunction for Analytic<F> {
    fn value(&self, x: f64) -> Result<f64> {
        Ok((self.0)(x).0)
    }
    fn d1(&self, x: f64) -> Result<f64> {
        Ok((self.0)(x).1)
    }
    fn d2(&self, x: f64) -> Result<f64> {
        Ok((self.0)(x).2)
    }
}

/// `W^{(q)}` itself, zero on the negative half-line.
impl TestFunction for ScaleGrid {
    fn value(&self, x: f64) -> Result<f64> {
        self.w_at(x)
    }
    fn d1(&self, x: f64) -> Result<f64> {
        self.w1_at(x)
    }
    fn d2(&self, x: f64) -> Result<f64> {
        self.w2_at(x)
    }
}

/// Split between the Taylor-form small jumps and the direct large jumps.
pub fn split_point(x: f64) -> f64 {
    (0.1f64).min(0.25 * x)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GeneratorValue {
    pub x: f64,
    pub value: f64,
    pub epsilon: f64,
    /// Contribution of jumps in `(0, ε]`.
    pub small_jumps: f64,
    /// `(1/2) sup|f''| ∫_(0,ε] y² Π(dy)` over `[x-ε, x]`.
    pub small_jump_bound: f64,
}

/// `∫_0^1 (1-s) f''(x - s y) ds`, split where `f''` may jump.
fn taylor_kernel<F: TestFunction + ?Sized>(f: &F, breaks: &[f64], x: f64, y: f64) -> Result<f64> {
    let mut cuts = vec![0.0, 1.0];
    for &b in breaks {
        let s = (x - b) / y;
        if s > 0.0 && s < 1.0 {
            cuts.push(s);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let err = std::cell::Cell::new(None);
    let mut acc = 0.0;
    for p in cuts.windows(2) {
        acc += gauss_legendre_5(
            |s| match f.d2(x - s * y) {
                Ok(v) => (1.0 - s) * v,
                Err(e) => {
                    err.set(Some(e));
                    f64::NAN
                }
            },
            p[0],
            p[1],
        );
    }
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn labelled(part: &str, x: f64) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Domain(format!("generator at x = {x}: {part} failed to converge ({e})"))
}

/// Applies the generator at `x > 0`.
pub fn generator_apply<F: TestFunction + ?Sized>(
    model: &LevyModel,
    f: &F,
    x: f64,
    quad: &Quad,
) -> Result<GeneratorValue> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("generator needs x > 0, got {x}")));
    }
    let fx = f.value(x)?;
    let f1 = f.d1(x)?;
    let sigma = model.sigma();
    let f2 = if sigma > 0.0 { f.d2(x)? } else { 0.0 };
    let mut value = model.gamma() * f1 + 0.5 * sigma * sigma * f2;
    let eps = split_point(x);
    let breaks = f.breaks();
    let jumps = model.jumps();
    let comp = |y: f64| if y < 1.0 { y * f1 } else { 0.0 };

    let (small, bound) = match jumps {
        JumpMeasure::None => (0.0, 0.0),
        JumpMeasure::Atoms(atoms) => {
            let mut acc = 0.0;
            let mut moment = 0.0;
            for a in atoms.iter().filter(|a| a.location <= eps) {
                let y = a.location;
                acc += a.mass * y * y * taylor_kernel(f, &breaks, x, y)?;
                moment += a.mass * y * y;
            }
            (acc, 0.5 * moment * sup_abs_d2(f, x, eps)?)
        }
        _ => {
            let density = |y: f64| jumps.density(y).unwrap_or(0.0);
            let failure = std::sync::Mutex::new(None);
            let integrand = |y: f64| match taylor_kernel(f, &breaks, x, y) {
                Ok(k) => density(y) * y * y * k,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    0.0
                }
            };
            let small = quad
                .integrate_sqrt_left(integrand, 0.0, eps)
                .map_err(labelled("small-jump part ∫_(0,ε] y² f''·Π(dy)", x))?
                .value;
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            let moment = quad
                .integrate_sqrt_left(|y| density(y) * y * y, 0.0, eps)
                .map_err(labelled("small-jump moment ∫_(0,ε] y² Π(dy)", x))?
                .value;
            (small, 0.5 * moment * sup_abs_d2(f, x, eps)?)
        }
    };
    if !small.is_finite() || !bound.is_finite() {
        return Err(Error::Domain(format!(
            "generator at x = {x}: small-jump part ∫_(0,ε] y² Π(dy) is not finite"
        )));
    }
    value += small;

    let large = match jumps {
        JumpMeasure::None => 0.0,
        JumpMeasure::Atoms(atoms) => {
            let mut acc = 0.0;
            for a in atoms.iter().filter(|a| a.location > eps) {
                let y = a.location;
                acc += a.mass * (f.value(x - y)? - fx + comp(y));
            }
            acc
        }
        _ => {
            let failure = std::sync::Mutex::new(None);
            let integrand = |y: f64| match f.value(x - y) {
                Ok(v) => (v - fx + comp(y)) * jumps.density(y).unwrap_or(0.0),
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    0.0
                }
            };
            let mut cuts = vec![eps, x];
            cuts.extend(breaks.iter().map(|b| x - b).filter(|&c| c > eps && c < x));
            cuts.extend(jumps.breakpoints().into_iter().filter(|&b| b > eps));
            if eps < 1.0 {
                cuts.push(1.0);
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let last = *cuts.last().unwrap();
            let mut acc = quad
                .integrate_breaks(integrand, &cuts)
                .map_err(labelled("jump part on (ε, x]", x))?
                .value;
            let tail = match jumps {
                JumpMeasure::PiecewisePower(_) => quad.integrate_to_inf_algebraic(integrand, last),
                _ => quad.integrate_to_inf(integrand, last, 1.0),
            };
            acc += tail
                .map_err(labelled("large-jump part on (max(x, breaks), ∞)", x))?
                .value;
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            acc
        }
    };
    if !large.is_finite() {
        return Err(Error::Domain(format!(
            "generator at x = {x}: large-jump part is not finite"
        )));
    }
    value += large;
    Ok(GeneratorValue {
        x,
        value,
        epsilon: eps,
        small_jumps: small,
        small_jump_bound: bound,
    })
}

fn sup_abs_d2<F: TestFunction + ?Sized>(f: &F, x: f64, eps: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for k in 0..=16 {
        let t = x - eps * k as f64 / 16.0;
        sup = sup.max(f.d2(t)?.abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_annihilated() {
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.5).unwrap();
        let f = Analytic(|_| (3.0, 0.0, 0.0));
        let g = generator_apply(&m, &f, 0.7, &Quad::default()).unwrap();
        assert!(g.value.abs() < 1e-12, "{g:?}");
    }

    #[test]
    fn exponentials_are_eigenfunctions() {
        let theta = 1.3;
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.4).unwrap();
        let f = Analytic(move |x: f64| {
            let e = (theta * x).exp();
            (e, theta * e, theta * theta * e)
        });
        let x = 0.9;
        let g = generator_apply(&m, &f, x, &Quad::default()).unwrap();
        let expected = m.psi(theta).unwrap() * (theta * x).exp();
        assert!(
            (g.value - expected).abs() < 1e-9 * expected,
            "{} vs {expected}",
            g.value
        );
    }
}
