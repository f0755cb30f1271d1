//! Log-convexity certificates for the jump structure and the smoothness
//! class of `W^{(q)}` they imply.

use super::{Property, ShapeReport};
use crate::error::Result;
use crate::levy::probes::{log_convexity_check, LOG_CONVEXITY_TOL};
use crate::levy::{JumpKind, LevyModel, Variation};

/// Sampling window and size for the jump-structure certificates.
pub const CERT_INTERVAL: (f64, f64) = (0.01, 20.0);
pub const CERT_POINTS: usize = 512;
const UPSILON_POINTS: usize = 128;

/// Log-convexity of `π`, `Π̄` and `Ῡ`. Entries are `None` when the jump
/// measure has no density.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct JumpCertificates {
    pub density: Option<ShapeReport>,
    pub tail: Option<ShapeReport>,
    pub upsilon: Option<ShapeReport>,
}

impl JumpCertificates {
    pub fn density_log_convex(&self) -> bool {
        self.density.as_ref().is_some_and(|r| r.pass)
    }

    pub fn tail_log_convex(&self) -> bool {
        self.tail.as_ref().is_some_and(|r| r.pass)
    }

    pub fn upsilon_log_convex(&self) -> bool {
        self.upsilon.as_ref().is_some_and(|r| r.pass)
    }
}

fn vacuous(interval: (f64, f64)) -> ShapeReport {
    ShapeReport::new(Property::LogConvex, interval, LOG_CONVEXITY_TOL)
        .finish()
        .with_note("no jumps: holds vacuously")
}

pub fn certify_jumps(model: &LevyModel) -> Result<JumpCertificates> {
    let iv = CERT_INTERVAL;
    match model.jumps().kind() {
        JumpKind::None => Ok(JumpCertificates {
            density: Some(vacuous(iv)),
            tail: Some(vacuous(iv)),
            upsilon: Some(vacuous(iv)),
        }),
        JumpKind::Atoms => Ok(JumpCertificates {
            density: None,
            tail: None,
            upsilon: None,
        }),
        JumpKind::Density => {
            let j = model.jumps();
            let density = log_convexity_check(|x| j.density(x).unwrap_or(0.0), iv, CERT_POINTS, LOG_CONVEXITY_TOL)?;
            let tail = log_convexity_check(|x| j.tail(x), iv, CERT_POINTS, LOG_CONVEXITY_TOL)?;
            let upsilon = log_convexity_check(
                |x| model.upsilon_tail(x).unwrap_or(f64::NAN),
                iv,
                UPSILON_POINTS,
                LOG_CONVEXITY_TOL,
            )?;
            Ok(JumpCertificates {
                density: Some(density),
                tail: Some(tail),
                upsilon: Some(upsilon),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Smoothness {
    C2,
    C1,
    /// Bounded variation: `W^{(q)} ∈ C¹` iff `Π̄` has no jumps.
    C1IffTailContinuous {
        c1: bool,
        atoms: Vec<f64>,
    },
    Unknown,
}

impl std::fmt::Display for Smoothness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Smoothness::C2 => f.write_str("C2"),
            Smoothness::C1 => f.write_str("C1"),
            Smoothness::C1IffTailContinuous { c1: true, .. } => f.write_str("C1 (tail continuous)"),
            Smoothness::C1IffTailContinuous { c1: false, atoms } => {
                let locs: Vec<String> = atoms.iter().map(|a| format!("{a}")).collect();
                write!(f, "not C1 (atoms at {})", locs.join(", "))
            }
            Smoothness::Unknown => f.write_str("unknown"),
        }
    }
}

/// Only declared atoms count as discontinuities of `Π̄`.
pub fn smoothness_class(model: &LevyModel) -> Result<Smoothness> {
    if model.variation() == Variation::Bounded {
        let atoms: Vec<f64> = match model.jumps() {
            crate::levy::JumpMeasure::Atoms(a) => a.iter().map(|a| a.location).collect(),
            _ => Vec::new(),
        };
        return Ok(Smoothness::C1IffTailContinuous {
            c1: atoms.is_empty(),
            atoms,
        });
    }
    if model.jumps().kind() == JumpKind::Atoms {
        return Ok(Smoothness::Unknown);
    }
    let certs = certify_jumps(model)?;
    Ok(match (model.sigma() > 0.0, certs.density_log_convex()) {
        (true, true) => Smoothness::C2,
        (false, true) => Smoothness::C1,
        _ => Smoothness::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Atom, JumpMeasure, PiecewiseExp};

    #[test]
    fn classes() {
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(smoothness_class(&m).unwrap(), Smoothness::C2);
        let m = LevyModel::with_bv_drift(
            2.0,
            JumpMeasure::atoms(vec![Atom {
                location: 1.0,
                mass: 1.0,
            }])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(
            smoothness_class(&m).unwrap(),
            Smoothness::C1IffTailContinuous {
                c1: false,
                atoms: vec![1.0]
            }
        );
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(
            smoothness_class(&m).unwrap(),
            Smoothness::C1IffTailContinuous {
                c1: true,
                atoms: vec![]
            }
        );
        let m =
            LevyModel::with_bv_drift(3.0, JumpMeasure::PiecewiseExp(PiecewiseExp::kinked(0.5, 0.2).unwrap())).unwrap();
        let c = certify_jumps(&m).unwrap();
        assert!(c.density_log_convex() && c.tail_log_convex() && c.upsilon_log_convex());
    }
}
