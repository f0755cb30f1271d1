//! Monte Carlo estimates: reproducibility, horizon, and strategy ordering.

use snlevy::levy::config::gallery_model;
use snlevy::sim::{compare_strategies, simulate_value, SimMode, SimOptions, StrategySpec};
use snlevy::Exec;

fn opts(n: usize, exec: Exec) -> SimOptions {
    SimOptions {
        n_paths: n,
        seed: 11,
        exec,
        ..SimOptions::default()
    }
}

#[test]
fn sequential_and_parallel_runs_are_bit_identical() {
    for name in ["cramer_lundberg_exp", "piecewise_exp", "atomic"] {
        let m = gallery_model(name).unwrap();
        let strategy = StrategySpec::Barrier { a: 2.0 };
        let a = simulate_value(&m, &strategy, 0.1, 1.0, &opts(3000, Exec::Sequential)).unwrap();
        let b = simulate_value(&m, &strategy, 0.1, 1.0, &opts(3000, Exec::Parallel)).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits(), "{name}");
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits(), "{name}");
    }
}

#[test]
fn doubling_the_horizon_moves_the_estimate_by_less_than_the_bias_bound() {
    let m = gallery_model("cramer_lundberg_exp").unwrap();
    let strategy = StrategySpec::Barrier { a: 2.107 };
    let short = SimOptions {
        horizon: Some(30.0),
        ..opts(4000, Exec::default())
    };
    let long = SimOptions {
        horizon: Some(60.0),
        ..short
    };
    let a = simulate_value(&m, &strategy, 0.1, 1.0, &short).unwrap();
    let b = simulate_value(&m, &strategy, 0.1, 1.0, &long).unwrap();
    assert!(
        (b.mean - a.mean).abs() <= a.truncation_bias_bound,
        "{} vs {} (bound {})",
        a.mean,
        b.mean,
        a.truncation_bias_bound
    );
}

#[test]
fn threshold_strategies_do_not_beat_the_optimal_barrier() {
    let m = gallery_model("cramer_lundberg_exp").unwrap();
    let strategies = [
        StrategySpec::Barrier { a: 2.107 },
        StrategySpec::Threshold { b: 2.107, rate: 0.5 },
        StrategySpec::Threshold { b: 1.0, rate: 0.9 },
        StrategySpec::None,
    ];
    let cmp = compare_strategies(&m, 0.1, 2.0, &strategies, &opts(5000, Exec::default())).unwrap();
    assert!(!cmp.any_beats_reference());
    assert_eq!(cmp.rows[2].estimate.mean, 0.0);
}

#[test]
fn time_stepped_scheme_handles_infinite_activity() {
    let m = gallery_model("piecewise_power").unwrap();
    let strategy = StrategySpec::Barrier { a: 0.535 };
    let exact = simulate_value(&m, &strategy, 0.1, 0.5, &opts(100, Exec::default()));
    assert!(exact.is_err(), "exact scheme must refuse infinite activity");
    let euler = SimOptions {
        mode: SimMode::Euler {
            step: 0.01,
            cutoff: 0.01,
        },
        horizon: Some(20.0),
        ..opts(200, Exec::default())
    };
    let est = simulate_value(&m, &strategy, 0.1, 0.5, &euler).unwrap();
    assert!(est.approximate && est.mean > 0.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let m = gallery_model("cramer_lundberg_exp").unwrap();
    let s = StrategySpec::Barrier { a: 1.0 };
    assert!(simulate_value(&m, &s, 0.0, 1.0, &opts(10, Exec::default())).is_err());
    assert!(simulate_value(&m, &s, 0.1, -1.0, &opts(10, Exec::default())).is_err());
    assert!("barrier:a=x".parse::<StrategySpec>().is_err());
}
