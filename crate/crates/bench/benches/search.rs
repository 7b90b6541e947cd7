use std::hint::black_box;
use std::sync::atomic::AtomicBool;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use parpbo_bench::{instance, opb_text};
use parpbo_core::{
    assume_and_propagate, parse_opb, run_worker, NeutralPolarity, PoolConfig, PresolveResult,
    SearchConfig, SearchState, SolutionPool, Var, WorkerSetup,
};

fn parse(c: &mut Criterion) {
    let mut g = c.benchmark_group("parse");
    for (n, m) in [(100, 60), (1000, 600)] {
        let text = opb_text(n, m, 1);
        g.throughput(Throughput::Bytes(text.len() as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &text, |b, t| {
            b.iter(|| parse_opb(black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn presolve(c: &mut Criterion) {
    let inst = instance(500, 300, 2);
    c.bench_function("presolve/500", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % inst.num_vars();
            assume_and_propagate(&inst, Var::new(i), i % 2 == 0)
        })
    });
}

fn steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("search_steps");
    const STEPS: u64 = 10_000;
    g.throughput(Throughput::Elements(STEPS));
    for (n, m) in [(60, 40), (500, 300)] {
        let inst = instance(n, m, 3);
        g.bench_function(BenchmarkId::new("pick_flip", n), |b| {
            b.iter_batched(
                || SearchState::new(&inst, SearchConfig::default()).unwrap(),
                |mut st| {
                    for _ in 0..STEPS {
                        match st.pick_variable(&NeutralPolarity) {
                            Some(v) => {
                                st.flip(v);
                            }
                            None => {
                                st.escape_local_optimum();
                            }
                        }
                    }
                    st.best_objective()
                },
                BatchSize::SmallInput,
            )
        });
        g.bench_function(BenchmarkId::new("worker", n), |b| {
            let pr = PresolveResult::identity(&inst);
            let stop = AtomicBool::new(false);
            b.iter(|| {
                let pool = SolutionPool::new(&inst, PoolConfig::default()).unwrap();
                let setup = WorkerSetup {
                    id: 0,
                    original: &inst,
                    presolve: &pr,
                    config: SearchConfig::default(),
                    pool: &pool,
                    stop: &stop,
                    max_steps: Some(STEPS),
                    sharing: true,
                    polarity: true,
                };
                run_worker(setup, &mut |_| {})
                    .unwrap()
                    .best
                    .map(|s| s.objective)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, parse, presolve, steps);
criterion_main!(benches);
