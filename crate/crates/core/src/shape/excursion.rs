//! Tail of the excursion height for bounded-variation processes
//! `X_t = δt - S_t`:
//!
//! `n̄(sup ε > z) = (1/δ) Π̄(z) + (1/δ) ∫_(0,z] Π(dx) (1 - W(z-x)/W(z))`.

use crate::error::{Error, Result};
use crate::levy::{JumpMeasure, LevyModel, Variation};
use crate::numeric::quad::{gauss_legendre_5, Quad};
use crate::scale::ScaleGrid;

fn bv_drift(model: &LevyModel) -> Result<f64> {
    match (model.variation(), model.bv_drift()) {
        (Variation::Bounded, Some(d)) => Ok(d),
        _ => Err(Error::Domain(
            "excursion height tail needs a bounded-variation model".into(),
        )),
    }
}

/// `n̄(sup ε > z)` using the tabulated 0-scale function.
pub fn excursion_sup_tail(model: &LevyModel, scale: &ScaleGrid, z: f64) -> Result<f64> {
    let delta = bv_drift(model)?;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("excursion height needs z > 0, got {z}")));
    }
    if scale.q != 0.0 {
        return Err(Error::Precondition(
            "excursion height tail uses the 0-scale function".into(),
        ));
    }
    let wz = scale.w_at(z)?;
    let jumps = model.jumps();
    let integral = match jumps {
        JumpMeasure::None => 0.0,
        JumpMeasure::Atoms(atoms) => {
            let mut acc = 0.0;
            for a in atoms.iter().filter(|a| a.location <= z) {
                acc += a.mass * (1.0 - scale.w_at(z - a.location)? / wz);
            }
            acc
        }
        _ => {
            // Panels follow the grid of W(z - x) and the density breakpoints.
            let mut cuts: Vec<f64> = scale.xs.iter().map(|&x| z - x).filter(|&c| c > 0.0).collect();
            cuts.extend(jumps.breakpoints().into_iter().filter(|&b| b < z));
            cuts.push(0.0);
            cuts.push(z);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let w = |x: f64| scale.w_at(z - x).unwrap_or(f64::NAN);
            let f = |x: f64| jumps.density(x).unwrap_or(0.0) * (1.0 - w(x) / wz);
            let mut acc = Quad::default().integrate_sqrt_left(f, 0.0, cuts[1])?.value;
            for p in cuts.windows(2).skip(1) {
                acc += gauss_legendre_5(f, p[0], p[1]);
            }
            acc
        }
    };
    let value = (jumps.tail(z) + integral) / delta;
    if !value.is_finite() {
        return Err(Error::Domain(format!("excursion height tail is not finite at z = {z}")));
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailJump {
    pub z: f64,
    pub left: f64,
    pub right: f64,
    /// `right - left`.
    pub jump: f64,
}

/// One-sided values of the tail at `z ± 1e-10·max(1, z)`.
pub fn excursion_tail_jump(model: &LevyModel, scale: &ScaleGrid, z: f64) -> Result<TailJump> {
    let h = 1e-10 * z.max(1.0);
    let left = excursion_sup_tail(model, scale, z - h)?;
    let right = excursion_sup_tail(model, scale, z + h)?;
    Ok(TailJump {
        z,
        left,
        right,
        jump: right - left,
    })
}

/// Size of the drop predicted by `(1/δ) m (2 - W(0)/W(z))` for an atom of
/// mass `m` at `z`, as stated for the atom criterion.
pub fn stated_atom_jump(delta: f64, mass: f64, w0: f64, wz: f64) -> f64 {
    mass / delta * (2.0 - w0 / wz)
}

/// Drop obtained by inserting the atom into the tail formula directly:
/// `Π̄` loses `m` and the integral gains `m(1 - W(0)/W(z))`, so the tail
/// falls by `(1/δ) m W(0)/W(z)`.
pub fn atom_jump_from_tail_formula(delta: f64, mass: f64, w0: f64, wz: f64) -> f64 {
    mass / delta * (w0 / wz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::Atom;
    use crate::scale::ScaleOptions;

    #[test]
    fn atom_drop_matches_direct_substitution() {
        let m = LevyModel::with_bv_drift(
            2.0,
            JumpMeasure::atoms(vec![Atom {
                location: 1.0,
                mass: 1.0,
            }])
            .unwrap(),
        )
        .unwrap();
        let s = ScaleGrid::compute(&m, 0.0, &ScaleOptions::default()).unwrap();
        let j = excursion_tail_jump(&m, &s, 1.0).unwrap();
        let wz = s.w_at(1.0).unwrap();
        let expected = atom_jump_from_tail_formula(2.0, 1.0, s.w0, wz);
        assert!((-j.jump - expected).abs() < 1e-8, "{j:?} vs {expected}");
        assert!(stated_atom_jump(2.0, 1.0, s.w0, wz) > expected);
    }

    #[test]
    fn exponential_claims_give_continuous_decreasing_tail() {
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        let s = ScaleGrid::compute(&m, 0.0, &ScaleOptions::default()).unwrap();
        let j = excursion_tail_jump(&m, &s, 1.0).unwrap();
        assert!(j.jump.abs() < 1e-8, "{j:?}");
        let a = excursion_sup_tail(&m, &s, 0.5).unwrap();
        let b = excursion_sup_tail(&m, &s, 2.0).unwrap();
        assert!(a >= b);
        let bm = LevyModel::brownian(0.0, 1.0).unwrap();
        assert!(excursion_sup_tail(&bm, &s, 1.0).is_err());
    }
}
