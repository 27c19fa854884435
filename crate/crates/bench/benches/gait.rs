use criterion::{black_box, criterion_group, criterion_main, Criterion};
use spikelatch::cpg::{
    build_ring, plant_step, run_gait, GaitConfig, LoopMode, PlantConfig, PlantState, MUSCLES,
};
use spikelatch::latch::SynapticParams;
use spikelatch::{MuscleConfig, NeuronParams};

fn gait(c: &mut Criterion) {
    let cpg = build_ring(
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &SynapticParams::NOMINAL,
        &MuscleConfig::default(),
    );
    let cfg = GaitConfig {
        set_amplitude: Some(1000.0),
        ..GaitConfig::default()
    };
    // 1000 neural and plant steps.
    c.bench_function("gait_closed_100ms", |b| {
        b.iter(|| run_gait(&cpg, LoopMode::Closed, black_box(100.0), &cfg, &[]).unwrap())
    });
    let ps = PlantState::at_rest([0.0, 0.0, 1.0, 1.0]);
    let efforts = [0.8, 0.0, 0.0, 0.0, 0.0, 0.8, 0.0, 0.0];
    assert_eq!(efforts.len(), MUSCLES);
    c.bench_function("plant_step", |b| {
        b.iter(|| plant_step(black_box(&ps), &PlantConfig::default(), &efforts, 0.1))
    });
}

criterion_group!(benches, gait);
criterion_main!(benches);
