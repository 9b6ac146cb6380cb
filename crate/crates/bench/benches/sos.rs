use criterion::{criterion_group, criterion_main, Criterion};
use ncsos::random::{random_sos, rng};
use ncsos::sdp::solve;
use ncsos::sos::sdp_problem;
use ncsos::{build_gram_space, parse, sos_decompose, Alphabet, SolverOptions};

fn worked_example(c: &mut Criterion) {
    let p = parse("1 + x1'*x1 + x1*x1'", None).unwrap();
    c.bench_function("sos/worked_example", |b| {
        b.iter(|| sos_decompose(&p).unwrap())
    });
}

fn random_instances(c: &mut Criterion) {
    let mut r = rng(2024);
    let polys: Vec<_> = (0..8)
        .map(|i| random_sos(&mut r, Alphabet::new(1 + i % 2).unwrap(), 2, 3).0)
        .collect();
    let mut group = c.benchmark_group("sos");
    group.sample_size(10);
    group.bench_function("random_8", |b| {
        b.iter(|| {
            polys
                .iter()
                .map(|p| sos_decompose(p).unwrap().squares.len())
                .sum::<usize>()
        })
    });
    // The trace-minimizing solve alone, without rank reduction.
    let problems: Vec<_> = polys
        .iter()
        .map(|p| sdp_problem(&build_gram_space(p).unwrap()).unwrap().problem)
        .collect();
    group.bench_function("sdp_only_8", |b| {
        b.iter(|| {
            problems
                .iter()
                .map(|q| solve(q, &SolverOptions::default()).iterations)
                .sum::<usize>()
        })
    });
    group.finish();
}

criterion_group!(benches, worked_example, random_instances);
criterion_main!(benches);
