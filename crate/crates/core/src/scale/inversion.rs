//! Numerical inversion of Laplace transforms on the real line.
//!
//! Both routines invert `K` transforms at once from shared evaluation
//! nodes, since the scale function and its derivative come from the same
//! `ψ` evaluations.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler-accelerated Fourier-series inversion (Abate–Whitt).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EulerParams {
    /// Damping `A`; the discretisation error is about `e^{-A}`.
    pub a: f64,
    /// Terms summed before averaging.
    pub n: usize,
    /// Binomial averaging order.
    pub m: usize,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams { a: 22.0, n: 56, m: 8 }
    }
}

impl EulerParams {
    pub fn nodes(&self) -> usize {
        self.n + self.m + 1
    }

    /// Real part of the Bromwich abscissa used at time `t`.
    pub fn abscissa(&self, t: f64) -> f64 {
        self.a / (2.0 * t)
    }
}

/// `f(t)` for each transform returned by `transform`.
pub fn euler<const K: usize, F>(transform: F, t: f64, p: &EulerParams) -> Result<[f64; K]>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    if !(t > 0.0) {
        return Err(Error::Inversion {
            x: t,
            reason: "inversion point must be positive".into(),
        });
    }
    let total = p.n + p.m;
    let scale = (0.5 * p.a).exp() / t;
    let h = std::f64::consts::PI / t;
    let mut partial = [0.0; K];
    let first = transform(Complex64::new(p.abscissa(t), 0.0))?;
    for k in 0..K {
        partial[k] = 0.5 * scale * first[k].re;
    }
    let mut sums = vec![[0.0; K]; total + 1];
    sums[0] = partial;
    #[allow(clippy::needless_range_loop)]
    for j in 1..=total {
        let s = Complex64::new(p.abscissa(t), h * j as f64);
        let v = transform(s)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for k in 0..K {
            partial[k] += sign * scale * v[k].re;
        }
        sums[j] = partial;
    }
    let mut out = [0.0; K];
    let mut binom = 1.0;
    let norm = 0.5f64.powi(p.m as i32);
    for j in 0..=p.m {
        for k in 0..K {
            out[k] += binom * norm * sums[p.n + j][k];
        }
        binom *= (p.m - j) as f64 / (j + 1) as f64;
    }
    for (k, v) in out.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Inversion {
                x: t,
                reason: format!("non-finite result for transform {k}"),
            });
        }
    }
    Ok(out)
}

/// Fixed-Talbot inversion (Abate–Valkó) with `m` nodes. The transform must
/// be analytic to the right of a contour that wraps the negative real axis.
pub fn talbot<const K: usize, F>(transform: F, t: f64, m: usize) -> Result<[f64; K]>
where
    F: Fn(Complex64) -> Result<[Complex64; K]>,
{
    if !(t > 0.0) {
        return Err(Error::Inversion {
            x: t,
            reason: "inversion point must be positive".into(),
        });
    }
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut out = [0.0; K];
    let first = transform(Complex64::new(r, 0.0))?;
    for k in 0..K {
        out[k] = 0.5 * (r * t).exp() * first[k].re;
    }
    for j in 1..m {
        let theta = j as f64 * std::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let weight = (s * t).exp() * Complex64::new(1.0, sigma);
        let v = transform(s)?;
        for k in 0..K {
            out[k] += (weight * v[k]).re;
        }
    }
    for v in out.iter_mut() {
        *v *= r / m as f64;
        if !v.is_finite() {
            return Err(Error::Inversion {
                x: t,
                reason: "non-finite Talbot sum".into(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(s: Complex64) -> Result<[Complex64; 1]> {
        // L[1 - e^{-x}] = 1/s - 1/(s+1)
        Ok([Complex64::new(1.0, 0.0) / s - Complex64::new(1.0, 0.0) / (s + 1.0)])
    }

    #[test]
    fn euler_inverts_simple_transform() {
        for t in [0.01f64, 0.5, 3.0, 20.0] {
            let v = euler(one, t, &EulerParams::default()).unwrap()[0];
            let exact = 1.0 - (-t).exp();
            assert!((v - exact).abs() < 1e-9 * exact.max(1e-3), "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn talbot_inverts_simple_transform() {
        for t in [0.01f64, 0.5, 3.0, 20.0] {
            let v = talbot(one, t, 24).unwrap()[0];
            let exact = 1.0 - (-t).exp();
            assert!((v - exact).abs() < 1e-10 * exact.max(1e-3), "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn euler_handles_ramp() {
        let v = euler(
            |s| Ok([Complex64::new(2.0, 0.0) / (s * s)]),
            7.0,
            &EulerParams::default(),
        )
        .unwrap()[0];
        assert!((v - 14.0).abs() < 1e-7 * 14.0);
    }
}
