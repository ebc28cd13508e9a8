use std::collections::BTreeMap;
use std::hint::black_box;
use std::sync::Arc;

use causalec::harness::{fig1_scenario, fuzz_config, latency_comparison, FuzzParams};
use causalec::{check_causal, LinearCode, PrimeField, Protocol, Simulation, Value};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn code_algebra(c: &mut Criterion) {
    let code = LinearCode::five_server(PrimeField::new(257).unwrap(), 64);
    let x: Vec<Value> = (0..3)
        .map(|o| Value::new((0..64).map(|d| (o * 64 + d) % 257).collect()))
        .collect();
    let y = code.encode(&x).unwrap();
    let symbols: BTreeMap<usize, Value> = y.iter().cloned().enumerate().collect();
    let rs = code.minimal_recovery_sets(2).unwrap().last().unwrap().clone();
    let new = Value::new(vec![7; 64]);

    let mut g = c.benchmark_group("code");
    g.bench_function("encode", |b| b.iter(|| code.encode(black_box(&x)).unwrap()));
    g.bench_function("decode", |b| b.iter(|| code.decode(black_box(&rs), &symbols).unwrap()));
    g.bench_function("reencode", |b| {
        b.iter(|| code.reencode(2, 1, black_box(&y[2]), &x[1], &new).unwrap())
    });
    g.bench_function("recovery_sets", |b| {
        b.iter(|| LinearCode::five_server(PrimeField::new(257).unwrap(), 1))
    });
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let sc = fig1_scenario();
    let cfg = Arc::new(sc.config(0).unwrap());
    let mut g = c.benchmark_group("simulation");
    g.sample_size(20);
    g.bench_function("fig1_seed0", |b| b.iter(|| Simulation::new(Arc::clone(&cfg), 0).run()));
    for protocol in [Protocol::CausalEc, Protocol::EventualEc] {
        let cfg = Arc::new(fuzz_config(11, protocol, FuzzParams::default()));
        g.bench_function(format!("fuzz_seed11_{}", protocol.name()), |b| {
            b.iter(|| Simulation::new(Arc::clone(&cfg), 11).run())
        });
    }
    g.finish();
}

fn checkers(c: &mut Criterion) {
    let sc = fig1_scenario();
    let cfg = Arc::new(sc.config(3).unwrap());
    let k = cfg.code.k();
    let zero = cfg.code.zero_value();
    let outcome = Simulation::new(Arc::clone(&cfg), 3).run();
    let mut g = c.benchmark_group("checker");
    g.bench_function("check_causal_fig1", |b| {
        b.iter_batched(
            || outcome.history.clone(),
            |h| check_causal(&h, k, &zero),
            BatchSize::SmallInput,
        )
    });
    g.bench_function("trace_hash_fig1", |b| b.iter(|| outcome.trace.hash_hex()));
    g.bench_function("latency_fig1", |b| {
        b.iter(|| latency_comparison(black_box(&sc)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, code_algebra, simulation, checkers);
criterion_main!(benches);
