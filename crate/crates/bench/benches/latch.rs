use criterion::{black_box, criterion_group, criterion_main, Criterion};
use spikelatch::latch::SynapticParams;
use spikelatch::poincare::assess;
use spikelatch::NeuronParams;
use spikelatch_bench::nominal_system;

fn viability(c: &mut Criterion) {
    let cfg = Default::default();
    c.bench_function("viability_nominal", |b| {
        b.iter(|| {
            assess(
                black_box(&NeuronParams::RS),
                &NeuronParams::RS,
                &NeuronParams::LTS,
                &SynapticParams::NOMINAL,
                &cfg,
            )
            .unwrap()
        })
    });
}

fn return_map(c: &mut Criterion) {
    let mut sys = nominal_system();
    let fixed = sys.find_limit_cycle().unwrap().fixed_point.unwrap();
    c.bench_function("return_map_on_cycle", |b| {
        b.iter(|| sys.return_map(black_box(&fixed)).unwrap())
    });
}

criterion_group!(benches, viability, return_map);
criterion_main!(benches);
