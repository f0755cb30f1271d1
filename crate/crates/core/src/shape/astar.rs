//! The optimal barrier `a*`: the largest global minimiser of `W^{(q)'}`.

use crate::error::{Error, Result};
use crate::numeric::interp::hermite;
use crate::numeric::roots::golden_min;
use crate::scale::ScaleGrid;

/// Relative tie tolerance that widens the minimum into a plateau.
pub const PLATEAU_TOL: f64 = 1e-9;
/// `W'(x_max)` must exceed the minimum by this factor for `a*` to count as
/// localised with room to spare.
pub const MARGIN_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AStar {
    pub value: f64,
    pub w1_min: f64,
    pub plateau: (f64, f64),
    /// `W'(x_max) ≥ 1.1·min W'`.
    pub margin_ok: bool,
}

/// `a*` from the tabulated `W'` and `W''` of a scale grid.
pub fn find_a_star(scale: &ScaleGrid) -> Result<AStar> {
    a_star_from_table(&scale.xs, &scale.w1, &scale.w2)
}

/// `a*` from any table of `W'` with slopes `W''`. The plateau collects the
/// grid points within `1e-9·|min|` of the minimum; the run containing the
/// rightmost such point fixes `a*`.
pub fn a_star_from_table(xs: &[f64], w1: &[f64], w2: &[f64]) -> Result<AStar> {
    let n = xs.len();
    if n < 3 || w1.len() != n || w2.len() != n {
        return Err(Error::Domain("a* search needs at least 3 rows of W' and W''".into()));
    }
    let min = w1.iter().cloned().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Domain("W' table contains non-finite values".into()));
    }
    let tol = PLATEAU_TOL * min.abs();
    let right = (0..n).rev().find(|&i| w1[i] <= min + tol).unwrap();
    let mut left = right;
    while left > 0 && w1[left - 1] <= min + tol {
        left -= 1;
    }
    let x_max = xs[n - 1];
    if right == n - 1 {
        return Err(Error::NotLocalized { x_max });
    }
    let margin_ok = w1[n - 1] >= MARGIN_FACTOR * min;
    if right == 0 {
        return Ok(AStar {
            value: 0.0,
            w1_min: min,
            plateau: (0.0, 0.0),
            margin_ok,
        });
    }
    if right > left {
        return Ok(AStar {
            value: xs[right],
            w1_min: min,
            plateau: (if left == 0 { 0.0 } else { xs[left] }, xs[right]),
            margin_ok,
        });
    }
    let (a, b) = (xs[right - 1], xs[right + 1]);
    let interp = |x: f64| {
        let i = if x < xs[right] { right - 1 } else { right };
        hermite(xs[i], xs[i + 1], w1[i], w1[i + 1], w2[i], w2[i + 1], x).0
    };
    let (x, fx) = golden_min(interp, a, b, 1e-12 * b.max(1.0));
    let (value, w1_min) = if fx <= min { (x, fx) } else { (xs[right], min) };
    Ok(AStar {
        value,
        w1_min,
        plateau: (value, value),
        margin_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, b: f64) -> Vec<f64> {
        (1..=n).map(|i| b * i as f64 / n as f64).collect()
    }

    #[test]
    fn interior_minimum_is_refined() {
        let xs = grid(400, 4.0);
        let w1: Vec<f64> = xs.iter().map(|x| 1.0 + (x - 1.2345f64).powi(2)).collect();
        let w2: Vec<f64> = xs.iter().map(|x| 2.0 * (x - 1.2345)).collect();
        let a = a_star_from_table(&xs, &w1, &w2).unwrap();
        assert!((a.value - 1.2345).abs() < 1e-7, "{a:?}");
        assert_eq!(a.plateau.0, a.plateau.1);
        assert!(a.margin_ok);
    }

    #[test]
    fn increasing_derivative_gives_zero() {
        let xs = grid(100, 2.0);
        let w1: Vec<f64> = xs.iter().map(|x| 1.0 + x).collect();
        let w2 = vec![1.0; xs.len()];
        assert_eq!(a_star_from_table(&xs, &w1, &w2).unwrap().value, 0.0);
    }

    #[test]
    fn plateau_takes_right_edge() {
        let xs = grid(100, 4.0);
        let w1: Vec<f64> = xs
            .iter()
            .map(|&x| {
                if x < 1.0 {
                    2.0 - x
                } else if x <= 2.0 {
                    1.0
                } else {
                    x - 1.0
                }
            })
            .collect();
        let w2 = vec![0.0; xs.len()];
        let a = a_star_from_table(&xs, &w1, &w2).unwrap();
        assert_eq!(a.value, 2.0);
        assert_eq!(a.plateau, (1.0, 2.0));
    }

    #[test]
    fn minimum_at_edge_is_not_localized() {
        let xs = grid(50, 1.0);
        let w1: Vec<f64> = xs.iter().map(|x| 2.0 - x).collect();
        let w2 = vec![-1.0; xs.len()];
        assert!(matches!(
            a_star_from_table(&xs, &w1, &w2),
            Err(Error::NotLocalized { .. })
        ));
    }
}
