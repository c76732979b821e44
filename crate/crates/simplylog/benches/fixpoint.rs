//! Compares the rayon-parallel fixpoint and model-check loops against their
//! sequential fallbacks on a transitive-closure workload whose grounded
//! program grows cubically with the number of nodes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use simplylog::clausal::{
    is_model, is_model_sequential, least_herbrand_model, least_herbrand_model_sequential,
};
use simplylog::reader::parse_program;
use simplylog::{GeneralClause, Program};

fn chain_program(nodes: usize) -> Program {
    let mut src = String::new();
    for i in 0..nodes - 1 {
        src.push_str(&format!("edge(n{}, n{}).\n", i, i + 1));
    }
    src.push_str("path(X, Y) :- edge(X, Y).\n");
    src.push_str("path(X, Z) :- edge(X, Y), path(Y, Z).\n");
    let parsed = parse_program(&src);
    assert!(parsed.errors.is_empty(), "bench program must parse cleanly");
    Program::from_clauses(
        parsed
            .clauses
            .iter()
            .map(|c| GeneralClause::from_term(&c.term).unwrap())
            .collect(),
    )
}

fn bench_fixpoint(c: &mut Criterion) {
    let mut group = c.benchmark_group("least_herbrand_model");
    for nodes in [10usize, 20, 30] {
        let program = chain_program(nodes);
        group.bench_with_input(BenchmarkId::new("parallel", nodes), &program, |b, p| {
            b.iter(|| least_herbrand_model(p, 0, u32::MAX).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", nodes), &program, |b, p| {
            b.iter(|| least_herbrand_model_sequential(p, 0, u32::MAX).unwrap())
        });
    }
    group.finish();
}

fn bench_model_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("is_model");
    for nodes in [10usize, 20, 30] {
        let program = chain_program(nodes);
        let model = least_herbrand_model(&program, 0, u32::MAX).unwrap().model;
        let input = (program, model);
        group.bench_with_input(BenchmarkId::new("parallel", nodes), &input, |b, (p, m)| {
            b.iter(|| assert!(is_model(m, p, 0)))
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", nodes),
            &input,
            |b, (p, m)| b.iter(|| assert!(is_model_sequential(m, p, 0))),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_fixpoint, bench_model_check);
criterion_main!(benches);
