//! Claim sizes drawn by inversion of the jump tail.

use crate::error::{Error, Result};
use crate::levy::{ExpSegment, JumpMeasure};
use crate::numeric::roots::brent;

/// Jump sizes above a cutoff, distributed as `Π` restricted to `(cut, ∞)`
/// and normalised.
#[derive(Debug, Clone)]
pub(crate) enum ClaimSampler {
    /// No jumps above the cutoff.
    Empty,
    Segments {
        segments: Vec<ExpSegment>,
        /// Mass of each segment above the cutoff.
        masses: Vec<f64>,
        total: f64,
        cut: f64,
    },
    Atoms {
        locations: Vec<f64>,
        cumulative: Vec<f64>,
    },
    /// Numerical inversion of `Π̄` on `(cut, ∞)`.
    Tail {
        measure: JumpMeasure,
        cut: f64,
        total: f64,
    },
}

impl ClaimSampler {
    pub(crate) fn new(measure: &JumpMeasure, cut: f64) -> Result<Self> {
        match measure {
            JumpMeasure::None => Ok(ClaimSampler::Empty),
            JumpMeasure::PiecewiseExp(p) => {
                let segments: Vec<ExpSegment> = p.segments().iter().filter(|s| s.hi > cut).copied().collect();
                let masses: Vec<f64> = segments.iter().map(|s| segment_mass(s, s.lo.max(cut), s.hi)).collect();
                let total: f64 = masses.iter().sum();
                if !(total.is_finite()) {
                    return Err(Error::Unsupported(
                        "claim sampler needs a finite jump mass above the cutoff".into(),
                    ));
                }
                Ok(ClaimSampler::Segments {
                    segments,
                    masses,
                    total,
                    cut,
                })
            }
            JumpMeasure::Atoms(atoms) => {
                let kept: Vec<_> = atoms.iter().filter(|a| a.location > cut).collect();
                let mut acc = 0.0;
                let cumulative = kept
                    .iter()
                    .map(|a| {
                        acc += a.mass;
                        acc
                    })
                    .collect();
                Ok(ClaimSampler::Atoms {
                    locations: kept.iter().map(|a| a.location).collect(),
                    cumulative,
                })
            }
            JumpMeasure::PiecewisePower(_) => {
                if !(cut > 0.0) {
                    return Err(Error::Unsupported(
                        "infinite-activity jumps need a positive cutoff".into(),
                    ));
                }
                Ok(ClaimSampler::Tail {
                    measure: measure.clone(),
                    cut,
                    total: measure.tail(cut),
                })
            }
        }
    }

    /// Rate of jumps above the cutoff.
    pub(crate) fn rate(&self) -> f64 {
        match self {
            ClaimSampler::Empty => 0.0,
            ClaimSampler::Segments { total, .. } | ClaimSampler::Tail { total, .. } => *total,
            ClaimSampler::Atoms { cumulative, .. } => cumulative.last().copied().unwrap_or(0.0),
        }
    }

    /// Claim size from a uniform `u ∈ [0, 1)`.
    pub(crate) fn sample(&self, u: f64) -> f64 {
        match self {
            ClaimSampler::Empty => 0.0,
            ClaimSampler::Segments {
                segments,
                masses,
                total,
                cut,
            } => {
                let mut m = u * total;
                for (s, &mass) in segments.iter().zip(masses) {
                    if m < mass || std::ptr::eq(s, segments.last().unwrap()) {
                        return invert_segment(s, s.lo.max(*cut), m.min(mass));
                    }
                    m -= mass;
                }
                unreachable!()
            }
            ClaimSampler::Atoms { locations, cumulative } => {
                let target = u * cumulative.last().unwrap();
                let i = cumulative.partition_point(|&c| c <= target);
                locations[i.min(locations.len() - 1)]
            }
            ClaimSampler::Tail { measure, cut, total } => {
                // Π̄(y) = (1 - u)·Π̄(cut), solved on a log scale.
                let target = (1.0 - u) * total;
                if target >= *total {
                    return *cut;
                }
                let mut hi = 2.0 * cut;
                while measure.tail(hi) > target {
                    hi *= 2.0;
                }
                let f = |z: f64| measure.tail(z.exp()) - target;
                brent(f, cut.ln(), hi.ln(), 1e-13).map(f64::exp).unwrap_or(hi)
            }
        }
    }
}

/// `∫_l^r A e^{b x} dx`.
fn segment_mass(s: &ExpSegment, l: f64, r: f64) -> f64 {
    let b = s.slope;
    let base = (s.log_amp + b * l).exp();
    if r.is_infinite() {
        return if b < 0.0 { base / -b } else { f64::INFINITY };
    }
    if b == 0.0 {
        base * (r - l)
    } else {
        base * (b * (r - l)).exp_m1() / b
    }
}

/// `y ≥ l` with `∫_l^y A e^{b x} dx = m`.
fn invert_segment(s: &ExpSegment, l: f64, m: f64) -> f64 {
    let b = s.slope;
    let base = (s.log_amp + b * l).exp();
    let y = if b == 0.0 {
        l + m / base
    } else {
        l + (b * m / base).ln_1p() / b
    };
    if y.is_finite() {
        y.min(s.hi)
    } else {
        s.hi.min(l + m / base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Atom, PiecewiseExp, PiecewisePower};

    #[test]
    fn exponential_quantiles() {
        let m = JumpMeasure::PiecewiseExp(PiecewiseExp::exponential(1.0, 2.0).unwrap());
        let s = ClaimSampler::new(&m, 0.0).unwrap();
        assert!((s.rate() - 1.0).abs() < 1e-14);
        for u in [0.0, 0.1, 0.5, 0.9, 0.999] {
            let y = s.sample(u);
            let expected = -(1.0f64 - u).ln() / 2.0;
            assert!((y - expected).abs() < 1e-12, "{u}: {y} vs {expected}");
        }
    }

    #[test]
    fn kinked_quantiles_match_tail() {
        let m = JumpMeasure::PiecewiseExp(PiecewiseExp::kinked(0.5, 1.0).unwrap());
        let s = ClaimSampler::new(&m, 0.0).unwrap();
        let total = m.tail(0.0);
        for u in [0.05, 0.3, 0.7, 0.95, 0.9999] {
            let y = s.sample(u);
            let cdf = 1.0 - m.tail(y) / total;
            assert!((cdf - u).abs() < 1e-12, "{u}: {cdf}");
        }
    }

    #[test]
    fn atoms_and_power_tail() {
        let m = JumpMeasure::atoms(vec![
            Atom {
                location: 1.0,
                mass: 1.0,
            },
            Atom {
                location: 3.0,
                mass: 3.0,
            },
        ])
        .unwrap();
        let s = ClaimSampler::new(&m, 0.0).unwrap();
        assert_eq!(s.sample(0.2), 1.0);
        assert_eq!(s.sample(0.3), 3.0);
        let p = JumpMeasure::PiecewisePower(PiecewisePower::new(1.5, 0.5, 1.0).unwrap());
        let s = ClaimSampler::new(&p, 0.01).unwrap();
        let y = s.sample(0.5);
        assert!((p.tail(y) / p.tail(0.01) - 0.5).abs() < 1e-10);
    }
}
