use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use tapelab::analytics::oos::symbol_trades;
use tapelab::analytics::{detect_out_of_sequence, latency_stats, latency_window_events, GroupBy, WindowKinds};
use tapelab::nbbo::{stream_nbbo, TapeOrdering};
use tapelab::sim::{consolidate, generate_events, simulate};
use tapelab::tape::{read_tape_bytes, write_tape_to};
use tapelab::{Registry, SipId};
use tapelab_bench::busy_symbol;

fn pipeline(c: &mut Criterion) {
    let cfg = busy_symbol(40.0, 120);
    let out = simulate(&cfg).unwrap();
    let tape = &out.sips.tape(SipId::C).records;
    let n = tape.len() as u64;
    let trades = symbol_trades(tape, out.directory.lookup("BUSY").unwrap().id, false);
    let registry = Registry::standard();

    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.throughput(Throughput::Elements(out.truth.len() as u64));
    g.bench_function("generate", |b| b.iter(|| generate_events(black_box(&cfg)).unwrap()));
    g.bench_function("consolidate", |b| {
        b.iter(|| consolidate(black_box(&out.truth), &out.directory, &cfg.latency, cfg.seed).unwrap())
    });
    g.finish();

    let mut g = c.benchmark_group("analytics");
    g.throughput(Throughput::Elements(n));
    g.bench_function("nbbo_sip_order", |b| b.iter(|| stream_nbbo(black_box(tape), TapeOrdering::SipOrder, &registry)));
    g.bench_function("latency_stats", |b| {
        b.iter(|| latency_stats(black_box(tape), GroupBy::SipExchange, &out.directory))
    });
    g.bench_function("latency_windows", |b| b.iter(|| latency_window_events(black_box(tape), WindowKinds::Both)));
    g.finish();

    let mut g = c.benchmark_group("oos");
    g.throughput(Throughput::Elements(trades.len() as u64));
    g.bench_function("detect", |b| b.iter(|| detect_out_of_sequence(black_box(&trades)).unwrap()));
    g.finish();

    let mut bytes = Vec::new();
    write_tape_to(&mut bytes, tape, &out.directory, out.scenario_hash).unwrap();
    let mut g = c.benchmark_group("tape_io");
    g.throughput(Throughput::Bytes(bytes.len() as u64));
    g.bench_function("write", |b| {
        b.iter_batched(
            || Vec::with_capacity(bytes.len()),
            |mut buf| write_tape_to(&mut buf, black_box(tape), &out.directory, out.scenario_hash).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.bench_function("read", |b| b.iter(|| read_tape_bytes(black_box(&bytes)).unwrap()));
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
