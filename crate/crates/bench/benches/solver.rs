use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geeopt::brd::{run_brd, SurrogateObjective};
use geeopt::gen::generate;
use geeopt::learning::learn;
use geeopt::model::UserView;
use geeopt::oracle::{grid_search_gee, GridSpec};
use geeopt::{maximize_gee, BrdOptions, GenConfig, LearningParams, PowerAllocation, QosMode, SolverOptions};

fn scenario(users: usize, subcarriers: usize) -> geeopt::Scenario {
    generate(&GenConfig {
        users,
        subcarriers,
        seed: 42,
        r_min: 0.266,
        ..GenConfig::default()
    })
    .unwrap()
}

fn learning(c: &mut Criterion) {
    let mut group = c.benchmark_group("learning");
    for n in [4, 16, 64] {
        let s = scenario(12, n);
        let p = PowerAllocation::uniform(&s);
        let view = UserView::new(&s, &p, 0);
        let objective = SurrogateObjective::at(&view, p.user(0), 500.0);
        let offsets = vec![0.0; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| learn(&objective, s.p_max[0], &offsets, &LearningParams::default()))
        });
    }
    group.finish();
}

fn brd(c: &mut Criterion) {
    let s = scenario(12, 4);
    let p = PowerAllocation::uniform(&s);
    c.bench_function("brd/12x4 at λ=500", |b| {
        b.iter(|| {
            run_brd(&s, &p, black_box(500.0), &QosMode::None, &BrdOptions::default(), &LearningParams::default()).unwrap()
        })
    });
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize_gee");
    group.sample_size(10);
    let s = scenario(12, 4);
    for mode in [QosMode::None, QosMode::barrier(), QosMode::generalized()] {
        let opts = SolverOptions::with_qos(mode);
        group.bench_function(mode.name(), |b| b.iter(|| maximize_gee(black_box(&s), &opts).unwrap()));
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    let s = scenario(2, 2);
    group.bench_function("2x2 at 50 points", |b| {
        b.iter(|| grid_search_gee(black_box(&s), &GridSpec::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, learning, brd, solver, grid);
criterion_main!(benches);
