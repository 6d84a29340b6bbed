use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use quadroot::problems::EvalCounter;
use quadroot::solvers::step;
use quadroot::{format_scientific, solve, MethodId, ProblemId};
use quadroot_bench::fixture;

fn steps(c: &mut Criterion) {
    let fx = fixture(ProblemId::F1, 2048);
    let mut group = c.benchmark_group("step_f1_2048");
    for m in MethodId::TABLE_ORDER {
        group.bench_function(BenchmarkId::from_parameter(m.label()), |b| {
            b.iter(|| {
                let mut counter = EvalCounter::default();
                step(m, &fx.problem, black_box(&fx.x0), &fx.params, &mut counter)
            })
        });
    }
    group.finish();
}

fn formatting(c: &mut Criterion) {
    let fx = fixture(ProblemId::F6, 2048);
    let v = fx.x0.exp();
    c.bench_function("format_scientific_40", |b| {
        b.iter(|| format_scientific(black_box(&v), 40))
    });
}

fn m8_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("m8_solve_2048");
    group.sample_size(10);
    for pid in ProblemId::ALL {
        let fx = fixture(pid, 2048);
        group.bench_function(BenchmarkId::from_parameter(pid), |b| {
            b.iter(|| {
                solve(
                    MethodId::M8,
                    &fx.problem,
                    &fx.x0,
                    &fx.params,
                    &fx.stop,
                    fx.ctx,
                )
            })
        });
    }
    group.finish();
}

criterion_group!(benches, steps, formatting, m8_solve);
criterion_main!(benches);
