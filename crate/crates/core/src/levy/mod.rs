//! Spectrally negative Lévy processes given by a triplet `(γ, σ, Π)`.
//!
//! The Laplace exponent uses the compensation cutoff at 1:
//!
//! `ψ(θ) = γθ + σ²θ²/2 - ∫_(0,∞) (1 - e^{-θx} - θx·1{0<x<1}) Π(dx)`
//!
//! so `gamma` is the linear coefficient in exactly that representation.

pub mod config;
pub mod jumps;
pub mod ladder;
pub mod probes;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::quad::Quad;
use crate::numeric::roots::brent;

pub use jumps::{Atom, ExpSegment, JumpKind, JumpMeasure, PiecewiseExp, PiecewisePower};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    Bounded,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongTerm {
    DriftsToPlusInfinity,
    Oscillates,
    DriftsToMinusInfinity,
}

/// `ψ'(0+)` together with the long-term behaviour it implies. The value is
/// `-∞` when the large jumps have infinite mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSign {
    pub mean: f64,
    pub class: LongTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    gamma: f64,
    sigma: f64,
    jumps: JumpMeasure,
    variation: Variation,
    phi0: f64,
}

impl LevyModel {
    pub fn new(gamma: f64, sigma: f64, jumps: JumpMeasure) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidModel("gamma must be finite".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidModel("sigma must be finite and non-negative".into()));
        }
        let small = jumps.small_moment();
        let variation = if sigma == 0.0 && small.is_finite() {
            Variation::Bounded
        } else {
            Variation::Unbounded
        };
        if variation == Variation::Bounded {
            let delta = gamma + small;
            if !(delta > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "bounded-variation model needs drift δ = γ + ∫_0^1 xΠ(dx) > 0, got {delta}"
                )));
            }
        }
        let mut model = LevyModel {
            gamma,
            sigma,
            jumps,
            variation,
            phi0: 0.0,
        };
        model.phi0 = model.compute_phi0()?;
        Ok(model)
    }

    /// Brownian motion with linear coefficient `gamma` and volatility `sigma`.
    pub fn brownian(gamma: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidModel("brownian needs sigma > 0".into()));
        }
        LevyModel::new(gamma, sigma, JumpMeasure::None)
    }

    /// Cramér–Lundberg process: premium rate `c`, claim rate `lambda`,
    /// exponential claims with mean `1/mu`, optional Gaussian part.
    pub fn cramer_lundberg(c: f64, lambda: f64, mu: f64, sigma: f64) -> Result<Self> {
        let jumps = JumpMeasure::PiecewiseExp(PiecewiseExp::exponential(lambda, mu)?);
        let gamma = c - jumps.small_moment();
        LevyModel::new(gamma, sigma, jumps)
    }

    /// Bounded-variation model `X_t = δt - S_t` given the drift `δ`.
    pub fn with_bv_drift(delta: f64, jumps: JumpMeasure) -> Result<Self> {
        let gamma = delta - jumps.small_moment();
        LevyModel::new(gamma, 0.0, jumps)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jumps(&self) -> &JumpMeasure {
        &self.jumps
    }

    pub fn variation(&self) -> Variation {
        self.variation
    }

    /// `δ` in `X_t = δt - S_t`, only for bounded variation.
    pub fn bv_drift(&self) -> Option<f64> {
        match self.variation {
            Variation::Bounded => Some(self.gamma + self.jumps.small_moment()),
            Variation::Unbounded => None,
        }
    }

    /// Gaussian drift of the descending ladder height, `d = σ²/2`.
    pub fn ladder_drift(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    /// Laplace exponent at complex `θ` with `Re θ ≥ 0`.
    pub fn psi_complex(&self, theta: Complex64) -> Result<Complex64> {
        let j = self.jumps.jump_integral(theta)?;
        Ok(theta * self.gamma + theta * theta * (0.5 * self.sigma * self.sigma) - j)
    }

    /// Laplace exponent `ψ(θ)` for `θ ≥ 0`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        if theta < 0.0 {
            return Err(Error::Domain(format!("psi needs theta >= 0, got {theta}")));
        }
        if theta == 0.0 {
            return Ok(0.0);
        }
        Ok(self.psi_complex(Complex64::new(theta, 0.0))?.re)
    }

    /// `ψ(θ)` with the jump part integrated numerically from the density.
    pub fn psi_quadrature(&self, theta: f64, quad: &Quad) -> Result<f64> {
        let j = self.jumps.jump_integral_quadrature(theta, quad)?;
        Ok(self.gamma * theta + 0.5 * self.sigma * self.sigma * theta * theta - j)
    }

    /// `ψ'(θ)` for `θ > 0` by complex-step differentiation of the analytic
    /// closed form (no subtractive cancellation).
    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            if theta == 0.0 {
                return Ok(self.drift_sign().mean);
            }
            return Err(Error::Domain(format!("psi' needs theta >= 0, got {theta}")));
        }
        let h = 1e-30 * theta.max(1.0);
        Ok(self.psi_complex(Complex64::new(theta, h))?.im / h)
    }

    /// `ψ'(0+) = γ - ∫_[1,∞) x Π(dx)` and the resulting long-term class.
    pub fn drift_sign(&self) -> DriftSign {
        let mean = self.gamma - self.jumps.large_moment();
        let class = if mean > 0.0 {
            LongTerm::DriftsToPlusInfinity
        } else if mean == 0.0 {
            LongTerm::Oscillates
        } else {
            LongTerm::DriftsToMinusInfinity
        };
        DriftSign { mean, class }
    }

    /// `Φ(0)`, the largest root of `ψ`.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    fn compute_phi0(&self) -> Result<f64> {
        if self.drift_sign().mean >= 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        let mut guard = 0;
        while self.psi(hi)? <= 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::RootFind("cannot bracket Φ(0): ψ stays non-positive".into()));
            }
        }
        let mut lo = 0.5 * hi;
        guard = 0;
        while self.psi(lo)? >= 0.0 {
            lo *= 0.5;
            guard += 1;
            if guard > 1000 {
                return Err(Error::RootFind("cannot find θ with ψ(θ) < 0 below Φ(0)".into()));
            }
        }
        brent(|t| self.psi(t).unwrap_or(f64::NAN), lo, hi, 1e-15 * hi)
    }

    /// `Φ(q)`, the largest root of `ψ(θ) = q`.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::Domain(format!("Phi needs q >= 0, got {q}")));
        }
        if q == 0.0 {
            return Ok(self.phi0);
        }
        let lo = self.phi0;
        let mut hi = (lo + 1.0).max(2.0 * lo);
        let mut guard = 0;
        while self.psi(hi)? <= q {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::RootFind(format!("cannot bracket Φ({q}): ψ grows too slowly")));
            }
        }
        let f = |t: f64| self.psi(t).map(|v| v - q).unwrap_or(f64::NAN);
        let root = brent(f, lo, hi, 1e-16 * hi)?;
        if root.is_nan() {
            return Err(Error::RootFind(format!("Φ({q}) evaluated to NaN")));
        }
        Ok(root)
    }

    /// `Π̄(x)`.
    pub fn pi_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("pi_tail needs x > 0, got {x}")));
        }
        Ok(self.jumps.tail(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl() -> LevyModel {
        LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap()
    }

    #[test]
    fn psi_brownian_and_zero() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert_eq!(bm.psi(2.0).unwrap(), 2.0);
        assert_eq!(bm.psi(0.0).unwrap(), 0.0);
        assert_eq!(cl().psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_cramer_lundberg_closed_form() {
        // cθ - λθ/(μ+θ) at θ = 3
        let v = cl().psi(3.0).unwrap();
        assert!((v - 2.4).abs() < 1e-14);
        let quad = cl().psi_quadrature(3.0, &Quad::with_tolerances(1e-13, 1e-15)).unwrap();
        assert!((quad - 2.4).abs() < 1e-11);
    }

    #[test]
    fn phi_brownian_and_cramer_lundberg() {
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!((bm.phi(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(cl().phi(0.0).unwrap(), 0.0);
        // θ - θ/(2+θ) = 0.1  ⇔  θ² + 1.9θ... solved by the quadratic formula
        // θ(2+θ) - θ = 0.1(2+θ)  ⇒  θ² + 0.9θ - 0.2 = 0
        let oracle = (-0.9 + (0.81f64 + 0.8).sqrt()) / 2.0;
        assert!((cl().phi(0.1).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn drift_sign_cases() {
        assert!((cl().drift_sign().mean - 0.5).abs() < 1e-15);
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert_eq!(bm.drift_sign().class, LongTerm::Oscillates);
        let down = LevyModel::cramer_lundberg(0.2, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(down.drift_sign().class, LongTerm::DriftsToMinusInfinity);
        assert!(down.phi0() > 0.0);
        assert!(down.psi(down.phi0()).unwrap().abs() < 1e-14);
        let heavy = LevyModel::new(
            1.0,
            0.0,
            JumpMeasure::PiecewisePower(PiecewisePower::new(1.5, 0.5, 1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(heavy.drift_sign().mean, f64::NEG_INFINITY);
        assert!(heavy.phi0() > 0.0);
    }

    #[test]
    fn variation_classification() {
        assert_eq!(cl().variation(), Variation::Bounded);
        assert!((cl().bv_drift().unwrap() - 1.0).abs() < 1e-15);
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert_eq!(bm.variation(), Variation::Unbounded);
        let pw = LevyModel::new(
            0.0,
            0.0,
            JumpMeasure::PiecewisePower(PiecewisePower::new(1.5, 0.5, 1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(pw.variation(), Variation::Unbounded);
        assert!(LevyModel::cramer_lundberg(-0.5, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn complex_step_derivative_matches_closed_form() {
        // ψ'(θ) = c - λμ/(μ+θ)²
        let d = cl().psi_prime(0.7).unwrap();
        assert!((d - (1.0 - 2.0 / (2.7f64 * 2.7))).abs() < 1e-14);
    }
}
