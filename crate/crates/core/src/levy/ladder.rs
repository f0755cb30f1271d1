//! Descending ladder quantities: `κ̂(q,·)`, its killing term, drift, and the
//! tilted tail `Ῡ_q` with density `υ_q`.

use super::{JumpKind, LevyModel};
use crate::error::{Error, Result};
use crate::numeric::quad::Quad;

/// The Bernstein function `θ ↦ κ̂(q,θ)` split into its Lévy–Khintchine parts.
#[derive(Debug, Clone)]
pub struct LadderExponent<'a> {
    model: &'a LevyModel,
    pub q: f64,
    pub phi_q: f64,
    pub killing: f64,
    pub drift: f64,
}

/// Value of `Ῡ_q(x)` and of its density `υ_q(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonQ {
    pub tail: f64,
    pub density: f64,
}

impl LevyModel {
    /// `κ̂(q,θ) = (q - ψ(θ))/(Φ(q) - θ)`, with `ψ'(Φ(q))` at the removable
    /// singularity.
    pub fn ladder_exponent(&self, q: f64, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::Domain(format!("ladder exponent needs theta >= 0, got {theta}")));
        }
        let phi = self.phi(q)?;
        self.ladder_exponent_with(q, phi, theta)
    }

    fn ladder_exponent_with(&self, q: f64, phi: f64, theta: f64) -> Result<f64> {
        let value = if (theta - phi).abs() < 1e-6 {
            self.psi_prime(phi)?
        } else {
            (q - self.psi(theta)?) / (phi - theta)
        };
        if value < 0.0 {
            return Err(Error::Domain(format!(
                "ladder exponent came out negative ({value:.3e}) at q = {q}, theta = {theta}"
            )));
        }
        Ok(value)
    }

    pub fn ladder(&self, q: f64) -> Result<LadderExponent<'_>> {
        let phi_q = self.phi(q)?;
        let killing = if phi_q > 0.0 { q / phi_q } else { self.drift_sign().mean };
        Ok(LadderExponent {
            model: self,
            q,
            phi_q,
            killing,
            drift: self.ladder_drift(),
        })
    }

    /// `Ῡ(x) = e^{Φ(0)x} ∫_x^∞ e^{-Φ(0)z} Π̄(z) dz`.
    pub fn upsilon_tail(&self, x: f64) -> Result<f64> {
        Ok(self.upsilon_q(0.0, x)?.tail)
    }

    /// `Ῡ_q(x) = ∫_0^∞ e^{-Φ(q)u} Π̄(x+u) du` and
    /// `υ_q(x) = ∫_0^∞ e^{-Φ(q)u} π(x+u) du`.
    pub fn upsilon_q(&self, q: f64, x: f64) -> Result<UpsilonQ> {
        let phi = self.phi(q)?;
        self.upsilon_with(phi, x, &Quad::default())
    }

    pub(crate) fn upsilon_with(&self, phi: f64, x: f64, quad: &Quad) -> Result<UpsilonQ> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("upsilon needs x > 0, got {x}")));
        }
        match self.jumps().kind() {
            JumpKind::None => {
                return Ok(UpsilonQ {
                    tail: 0.0,
                    density: 0.0,
                })
            }
            JumpKind::Atoms => {
                return Err(Error::Unsupported("upsilon_q needs a jump density".into()));
            }
            JumpKind::Density => {}
        }
        let jumps = self.jumps();
        let mut points = vec![x];
        points.extend(jumps.breakpoints().into_iter().filter(|&b| b > x));
        let last = *points.last().unwrap();
        let tail_f = |y: f64| (-phi * (y - x)).exp() * jumps.tail(y);
        let dens_f = |y: f64| (-phi * (y - x)).exp() * jumps.density(y).unwrap_or(0.0);
        let scale = (1.0f64).max(x);
        let tail = quad.integrate_breaks(tail_f, &points)?.value + quad.integrate_to_inf(tail_f, last, scale)?.value;
        let density = quad.integrate_breaks(dens_f, &points)?.value + quad.integrate_to_inf(dens_f, last, scale)?.value;
        if !tail.is_finite() {
            return Err(Error::Domain(format!(
                "Ῡ_q({x}) diverges: Π̄ is not integrable at infinity"
            )));
        }
        Ok(UpsilonQ { tail, density })
    }
}

impl LadderExponent<'_> {
    /// `κ̂(q,θ)` from the ratio form.
    pub fn ratio(&self, theta: f64) -> Result<f64> {
        self.model.ladder_exponent_with(self.q, self.phi_q, theta)
    }

    /// `κ̂(q,θ) = killing + dθ + θ ∫_0^∞ e^{-θx} Ῡ_q(x) dx`, the same
    /// Bernstein function from its Lévy–Khintchine representation.
    pub fn series(&self, theta: f64, quad: &Quad) -> Result<f64> {
        if self.model.jumps().kind() == JumpKind::Atoms {
            return Err(Error::Unsupported("Lévy–Khintchine form needs a jump density".into()));
        }
        let base = self.killing + self.drift * theta;
        if self.model.jumps().kind() == JumpKind::None || theta == 0.0 {
            return Ok(base);
        }
        let inner = Quad::with_tolerances(1e-11, 1e-15);
        let f = |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            let t = self
                .model
                .upsilon_with(self.phi_q, x, &inner)
                .map(|u| u.tail)
                .unwrap_or(f64::NAN);
            (-theta * x).exp() * t
        };
        let mut points = self.model.jumps().breakpoints();
        if points.is_empty() {
            points.push(1.0);
        }
        let last = *points.last().unwrap();
        let mut total = quad.integrate_sqrt_left(f, 0.0, points[0])?.value;
        total += quad.integrate_breaks(f, &points)?.value;
        total += quad.integrate_to_inf(f, last, 1.0 / theta)?.value;
        Ok(base + theta * total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{JumpMeasure, PiecewiseExp, PiecewisePower};

    fn cl() -> LevyModel {
        LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap()
    }

    #[test]
    fn brownian_ladder_value() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!((bm.ladder_exponent(2.0, 1.0).unwrap() - 1.5).abs() < 1e-13);
        let l = bm.ladder(2.0).unwrap();
        assert!((l.killing - 1.0).abs() < 1e-13);
        assert!((l.ratio(2.0).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_q_reduces_to_psi_over_theta() {
        let m = cl();
        for th in [0.3, 1.0, 4.0] {
            let k = m.ladder_exponent(0.0, th).unwrap();
            assert!((k - m.psi(th).unwrap() / th).abs() < 1e-14);
        }
        assert!((m.ladder_exponent(0.0, 0.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upsilon_exponential_values() {
        let m = cl();
        let u = m.upsilon_q(0.0, 1.0).unwrap();
        assert!((u.tail - (-2.0f64).exp() / 2.0).abs() < 1e-13);
        assert!((u.density - (-2.0f64).exp()).abs() < 1e-13);
        // Φ(q) = 1 ⇔ q = ψ(1) = 1 - 1/3
        let q = m.psi(1.0).unwrap();
        let u = m.upsilon_q(q, 1.0).unwrap();
        // e·∫_1^∞ e^{-z}·2e^{-2z} dz = 2e·e^{-3}/3
        let oracle = 2.0 * (1.0f64 - 3.0).exp() / 3.0;
        assert!((u.density - oracle).abs() < 1e-13, "{} vs {oracle}", u.density);
    }

    #[test]
    fn upsilon_monotone_for_monotone_density() {
        let m = LevyModel::new(
            5.0,
            0.0,
            JumpMeasure::PiecewisePower(PiecewisePower::new(1.5, 0.5, 1.0).unwrap()),
        )
        .unwrap();
        let phi = m.phi(0.1).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let x = 0.1 * i as f64;
            let u = m.upsilon_with(phi, x, &Quad::default()).unwrap();
            assert!(u.density <= prev);
            prev = u.density;
        }
    }

    #[test]
    fn series_representation_matches_ratio() {
        let m =
            LevyModel::with_bv_drift(3.0, JumpMeasure::PiecewiseExp(PiecewiseExp::kinked(0.5, 0.2).unwrap())).unwrap();
        let quad = Quad::with_tolerances(1e-10, 1e-14);
        for q in [0.0, 0.1, 1.0] {
            let l = m.ladder(q).unwrap();
            for th in [0.5, 2.0] {
                let a = l.ratio(th).unwrap();
                let b = l.series(th, &quad).unwrap();
                assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "q={q} θ={th}: {a} vs {b}");
            }
        }
    }
}
