//! Sequential against rayon-parallel execution for the two fan-out heavy
//! operations: tabulating a scale function and simulating paths.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use snlevy::levy::config::gallery_model;
use snlevy::scale::{ScaleGrid, ScaleOptions};
use snlevy::sim::{simulate_value, SimOptions, StrategySpec};
use snlevy::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn scale_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("scale_grid");
    group.sample_size(10);
    for name in ["cramer_lundberg_exp", "piecewise_power"] {
        let model = gallery_model(name).unwrap();
        for (label, exec) in MODES {
            let opts = ScaleOptions {
                exec,
                ..ScaleOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(label, name), &opts, |b, opts| {
                b.iter(|| ScaleGrid::compute(black_box(&model), 0.1, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_barrier");
    group.sample_size(10);
    let model = gallery_model("cramer_lundberg_exp").unwrap();
    let strategy = StrategySpec::Barrier { a: 2.107 };
    for (label, exec) in MODES {
        let opts = SimOptions {
            n_paths: 20_000,
            seed: 1,
            exec,
            ..SimOptions::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| simulate_value(black_box(&model), &strategy, 0.1, 1.0, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scale_grid, monte_carlo);
criterion_main!(benches);
