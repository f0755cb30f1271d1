//! Special functions with complex arguments needed by the closed-form
//! Laplace exponents.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `Γ(x)` for real `x` away from the poles.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Generalised exponential integral `E_p(z) = ∫_1^∞ e^{-zt} t^{-p} dt` for
/// non-integer `p > 0` and `Re z ≥ 0` (`z = 0` requires `p > 1`).
///
/// Power series for `|z| ≤ 1.5`, modified Lentz continued fraction beyond.
pub fn expint_p(p: f64, z: Complex64) -> Result<Complex64> {
    if p <= 0.0 || (p - p.round()).abs() < 1e-9 {
        return Err(Error::Domain(format!("E_p requires non-integer p > 0, got {p}")));
    }
    if z.re < 0.0 {
        return Err(Error::Domain(format!("E_p requires Re z ≥ 0, got {z}")));
    }
    if z.norm() == 0.0 {
        if p > 1.0 {
            return Ok(Complex64::new(1.0 / (p - 1.0), 0.0));
        }
        return Err(Error::Domain("E_p(0) diverges for p ≤ 1".into()));
    }
    if z.norm() <= 1.5 {
        Ok(expint_series(p, z))
    } else {
        expint_cf(p, z)
    }
}

fn expint_series(p: f64, z: Complex64) -> Complex64 {
    // E_p(z) = Γ(1-p) z^{p-1} - Σ_k (-z)^k / (k! (k+1-p))
    let lead = z.powf(p - 1.0) * gamma(1.0 - p);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term / (1.0 - p);
    for k in 1..200 {
        term = term * (-z) / k as f64;
        let add = term / (k as f64 + 1.0 - p);
        sum += add;
        if add.norm() <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    lead - sum
}

fn expint_cf(p: f64, z: Complex64) -> Result<Complex64> {
    const TINY: f64 = 1e-300;
    let mut b = z + p;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..20_000 {
        let an = -(i as f64) * (p - 1.0 + i as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * an + b);
        c = b + Complex64::new(an, 0.0) / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::Domain(format!(
        "E_p continued fraction did not converge at z = {z}"
    )))
}

/// `∫_l^r e^{-s x} dx`, stable for small `|s (r-l)|`; `r = ∞` needs `Re s > 0`.
pub fn exp_integral_segment(s: Complex64, l: f64, r: f64) -> Complex64 {
    if r.is_infinite() {
        return (-s * l).exp() / s;
    }
    let len = r - l;
    let w = s * len;
    if w.norm() < 1e-3 {
        // (1 - e^{-w})/w series
        let series = Complex64::new(1.0, 0.0) - w / 2.0 + w * w / 6.0 - w * w * w / 24.0 + w * w * w * w / 120.0;
        return (-s * l).exp() * len * series;
    }
    ((-s * l).exp() - (-s * r).exp()) / s
}

/// `∫_l^r x e^{-s x} dx` for finite `r`, or `r = ∞` with `Re s > 0`.
pub fn x_exp_integral_segment(s: Complex64, l: f64, r: f64) -> Complex64 {
    // d/ds of -∫ e^{-sx}
    if r.is_infinite() {
        return (-s * l).exp() * (Complex64::new(l, 0.0) / s + Complex64::new(1.0, 0.0) / (s * s));
    }
    let len = r - l;
    let w = s * len;
    if w.norm() < 1e-3 {
        // ∫_l^r x e^{-sx} = e^{-sl} ∫_0^len (l+u) e^{-su} du, expanded in s
        let el = (-s * l).exp();
        let m0 = len * (Complex64::new(1.0, 0.0) - w / 2.0 + w * w / 6.0 - w * w * w / 24.0);
        let m1 = len * len * (Complex64::new(0.5, 0.0) - w / 3.0 + w * w / 8.0 - w * w * w / 30.0);
        return el * (m0 * l + m1);
    }
    let el = (-s * l).exp();
    let er = (-s * r).exp();
    (el * l - er * r) / s + (el - er) / (s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::Quad;

    fn expint_quad(p: f64, z: Complex64) -> Complex64 {
        Quad::with_tolerances(1e-13, 1e-300)
            .integrate_to_inf(|t: f64| (-z * t).exp() * t.powf(-p), 1.0, 1.0)
            .unwrap()
            .value
    }

    #[test]
    fn gamma_negative_noninteger() {
        // Γ(-1.5) = 4√π/3
        let g = gamma(-1.5);
        assert!((g - 4.0 * std::f64::consts::PI.sqrt() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn expint_matches_quadrature_on_both_branches() {
        for &p in &[1.5, 2.5, 0.7, 1.3] {
            for &z in &[
                Complex64::new(0.3, 0.0),
                Complex64::new(1.2, 0.7),
                Complex64::new(1.6, 0.0),
                Complex64::new(3.0, 4.0),
                Complex64::new(0.9, 12.0),
            ] {
                let a = expint_p(p, z).unwrap();
                let b = expint_quad(p, z);
                assert!((a - b).norm() <= 1e-11 * b.norm().max(1e-3), "p={p} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn expint_is_continuous_across_branch_switch() {
        let p = 2.5;
        let lo = expint_p(p, Complex64::new(1.5, 0.0)).unwrap();
        let hi = expint_cf(p, Complex64::new(1.5, 0.0)).unwrap();
        assert!((lo - hi).norm() < 1e-13);
    }

    #[test]
    fn expint_at_zero() {
        assert!((expint_p(2.5, Complex64::new(0.0, 0.0)).unwrap().re - 1.0 / 1.5).abs() < 1e-15);
        assert!(expint_p(0.5, Complex64::new(0.0, 0.0)).is_err());
        assert!(expint_p(2.0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn segment_integrals_small_and_large_arguments() {
        for &s in &[
            Complex64::new(1e-6, 2e-6),
            Complex64::new(0.7, -3.0),
            Complex64::new(-0.5, 0.0),
        ] {
            let (l, r) = (0.4, 2.3);
            let q = Quad::with_tolerances(1e-14, 1e-300);
            let a = q.integrate(|x: f64| (-s * x).exp(), l, r).unwrap().value;
            let b = q.integrate(|x: f64| (-s * x).exp() * x, l, r).unwrap().value;
            assert!((exp_integral_segment(s, l, r) - a).norm() < 1e-13);
            assert!((x_exp_integral_segment(s, l, r) - b).norm() < 1e-13);
        }
        let s = Complex64::new(2.0, 1.0);
        assert!((exp_integral_segment(s, 1.0, f64::INFINITY) - (-s).exp() / s).norm() < 1e-15);
    }
}
