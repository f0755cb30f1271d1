//! Barrier values and the optimal barrier against closed forms.

use snlevy::definetti::{barrier_value, solve, SolveOptions, Verdict};
use snlevy::levy::config::gallery_model;
use snlevy::levy::{JumpMeasure, PiecewiseExp};
use snlevy::scale::{ScaleGrid, ScaleOptions};
use snlevy::LevyModel;

#[test]
fn brownian_barrier_value_matches_hyperbolic_form() {
    let m = gallery_model("brownian").unwrap();
    let q: f64 = 0.1;
    let r = (2.0 * q).sqrt();
    let s = ScaleGrid::compute(&m, q, &ScaleOptions::default()).unwrap();
    let a = 1.5;
    for x in [0.2, 1.0, 1.5, 3.0] {
        let exact = if x <= a {
            (r * x).sinh() / (r * (r * a).cosh())
        } else {
            x - a + (r * a).tanh() / r
        };
        let v = barrier_value(&s, a, x).unwrap();
        assert!((v - exact).abs() <= 1e-8 * exact, "x={x}: {v} vs {exact}");
    }
}

#[test]
fn optimal_barrier_maximises_the_value() {
    let m = gallery_model("cramer_lundberg_exp").unwrap();
    let sol = solve(&m, 0.1, &SolveOptions::default()).unwrap();
    assert_eq!(sol.verdict, Verdict::OptimalCertified);
    let a_star = sol.a_star.value;
    let s = ScaleGrid::compute(&m, 0.1, &ScaleOptions::default()).unwrap();
    for x in [0.5, 2.0, 4.0] {
        let best = barrier_value(&s, a_star, x).unwrap();
        for k in 1..40 {
            let a = 0.1 * k as f64;
            assert!(
                barrier_value(&s, a, x).unwrap() <= best + 1e-10,
                "a={a} beats a*={a_star} at x={x}"
            );
        }
    }
}

#[test]
fn value_is_smooth_at_the_barrier_with_slope_at_least_one() {
    let m = gallery_model("piecewise_exp").unwrap();
    let sol = solve(&m, 0.1, &SolveOptions::default()).unwrap();
    let a = sol.a_star.value;
    let i = sol.xs.partition_point(|&x| x < a);
    assert!((sol.value_d1[i] - 1.0).abs() < 1e-3, "v'(a*) = {}", sol.value_d1[i]);
    assert!(sol.min_slope() >= 1.0 - 1e-6, "min v' = {}", sol.min_slope());
}

#[test]
fn brownian_optimal_barrier_sits_at_the_origin() {
    let m = gallery_model("brownian").unwrap();
    let sol = solve(&m, 0.1, &SolveOptions::default()).unwrap();
    assert!(sol.a_star.value < 1e-3, "a* = {}", sol.a_star.value);
}

#[test]
fn bumped_density_is_not_certified() {
    let xs: Vec<f64> = (1..=160).map(|i| 0.05 * i as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| (-x).exp() + 2.0 * (-(x - 3.0) * (x - 3.0) / 0.1).exp())
        .collect();
    let jumps = JumpMeasure::PiecewiseExp(PiecewiseExp::from_table(&xs, &ys).unwrap());
    let m = LevyModel::with_bv_drift(6.0, jumps).unwrap();
    let sol = solve(&m, 0.1, &SolveOptions::default()).unwrap();
    assert_ne!(sol.verdict, Verdict::OptimalCertified, "{:?}", sol.reasons);
}

#[test]
fn solve_needs_positive_q() {
    let m = gallery_model("cramer_lundberg_exp").unwrap();
    assert!(solve(&m, 0.0, &SolveOptions::default()).is_err());
}
