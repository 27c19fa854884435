use spikelatch::engine::simulate_fixed;
use spikelatch::latch::*;
use spikelatch::poincare::{LatchSystem, PoincareConfig};
use spikelatch::{MuscleCell, MuscleConfig, NeuronParams, SimConfig, SpikeRecord};

fn nominal() -> (spikelatch::Network, LatchTopology) {
    build_latch(
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &SynapticParams::NOMINAL,
    )
}

fn set_and_run(t_end: f64, dt: f64) -> SpikeRecord {
    let (mut net, topo) = nominal();
    stimulate(&mut net, topo.set_target(), 500.0, 0.0, PULSE_MS);
    run_fixed(&mut net, 0.0, t_end, dt).unwrap()
}

fn mean_isi(times: &[f64]) -> f64 {
    (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
}

#[test]
fn quiescent_latch_never_fires() {
    let (mut net, _) = nominal();
    let spikes = run_fixed(&mut net, 0.0, 1000.0, 0.5).unwrap();
    assert!(spikes.is_empty());
}

#[test]
fn set_pulse_gives_sustained_alternation() {
    let spikes = set_and_run(5000.0, 0.1);
    let (_, topo) = nominal();
    let exc: Vec<usize> = spikes
        .events
        .iter()
        .filter(|(_, n)| *n != topo.i)
        .map(|(_, n)| *n)
        .collect();
    // ~42 ms period: two excitatory spikes per cycle.
    assert!(exc.len() > 200);
    assert!(
        exc.windows(2).all(|w| w[0] != w[1]),
        "E1/E2 spikes must alternate"
    );
    assert!(spikes.count_in(topo.e1, 4900.0, 5000.0) > 0);
    assert_eq!(spikes.times(topo.i).count(), 0);
}

fn excitatory_spikes(dt: f64) -> Vec<f64> {
    let (_, topo) = nominal();
    set_and_run(500.0, dt)
        .events
        .iter()
        .filter(|(_, n)| *n != topo.i)
        .map(|(t, _)| *t)
        .collect()
}

// Spike events are registered at the end of the step, so the phase error
// is first order in dt and accumulates over cycles: absolute times drift by
// ~2 ms between dt = 0.5 and 0.25 over 500 ms. Intervals agree closely and
// absolute times converge once dt <= 0.25.
#[test]
fn step_halving_convergence() {
    let coarse = excitatory_spikes(0.5);
    let fine = excitatory_spikes(0.25);
    let finer = excitatory_spikes(0.125);
    assert_eq!(coarse.len(), fine.len());
    assert_eq!(fine.len(), finer.len());
    for (a, b) in coarse.windows(2).zip(fine.windows(2)) {
        assert!(((a[1] - a[0]) - (b[1] - b[0])).abs() < 1.0);
    }
    for (x, y) in fine.iter().zip(&finer) {
        assert!((x - y).abs() < 1.0, "{x} vs {y}");
    }
}

#[test]
fn set_then_reset_pulse() {
    let (mut net, topo) = nominal();
    stimulate(&mut net, topo.set_target(), 500.0, 0.0, PULSE_MS);
    stimulate(&mut net, topo.reset_target(), 500.0, 300.0, PULSE_MS);
    let spikes = run_fixed(&mut net, 0.0, 1000.0, 0.1).unwrap();
    let window = 45.0;
    for t in (100..300).step_by(10) {
        assert_eq!(
            classify_activity(&spikes, &topo, window, t as f64),
            Activity::Active,
            "t = {t}"
        );
    }
    let last = spikes
        .times(topo.e1)
        .chain(spikes.times(topo.e2))
        .fold(0.0, f64::max);
    assert!(last < 350.0, "activity persists until {last}");
    for t in (400..1000).step_by(10) {
        assert_eq!(
            classify_activity(&spikes, &topo, window, t as f64),
            Activity::Inactive
        );
    }
    assert_eq!(
        classify_activity(&SpikeRecord::new(), &topo, window, 100.0),
        Activity::Inactive
    );
}

#[test]
fn interneuron_is_primed_while_active() {
    let (net, topo) = nominal();
    let cfg = SimConfig::default();
    let th = marginal_reset_property(&net, &topo, 1.0, &cfg).unwrap();
    assert!(th.active < th.inactive, "{th:?}");

    let (net0, topo0) = build_latch(
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &SynapticParams::NOMINAL.with(SynapticParam::Rst, 0.0),
    );
    let th0 = marginal_reset_property(&net0, &topo0, 1.0, &cfg).unwrap();
    assert!((th0.active - th0.inactive).abs() <= 2.0, "{th0:?}");
}

#[test]
fn threshold_bisection_meets_resolution() {
    let (net, topo) = nominal();
    let th = firing_threshold(&net, topo.e1, PULSE_MS, 20.0, 1.0, 1e4, 0.05).unwrap();
    let fires = |amp: f64| {
        let mut n = net.clone();
        stimulate(&mut n, topo.e1, amp, 0.0, PULSE_MS);
        run_fixed(&mut n, 0.0, PULSE_MS + 20.0, 0.05)
            .unwrap()
            .times(topo.e1)
            .count()
            > 0
    };
    assert!(fires(th));
    assert!(!fires(th - 1.0));
}

#[test]
fn adaptive_and_fixed_step_periods_agree() {
    let (net, topo) = nominal();
    let mut sys = LatchSystem::new(net, topo, PoincareConfig::default());
    let adaptive = sys.find_limit_cycle().unwrap().period.unwrap();

    let spikes = set_and_run(2000.0, 0.1);
    let e1: Vec<f64> = spikes.times(topo.e1).filter(|&t| t > 1000.0).collect();
    let fixed = mean_isi(&e1);
    assert!(
        (fixed - adaptive).abs() / adaptive < 0.02,
        "{fixed} vs {adaptive}"
    );
    assert!(adaptive > 5.0 && adaptive < 50.0);
}

#[test]
fn muscle_smooths_tonic_firing() {
    let (mut net, topo) = nominal();
    stimulate(&mut net, topo.set_target(), 500.0, 0.0, PULSE_MS);
    let cfg = SimConfig {
        dt: 0.1,
        t_end: 1000.0,
        ..SimConfig::default()
    };
    let traj = simulate_fixed(&mut net, &cfg, 1).unwrap();
    let mc = MuscleConfig::default();
    let mut muscle = MuscleCell::new(
        &mc,
        vec![(topo.e1, mc.conductance), (topo.e2, mc.conductance)],
    );
    let mut efforts = Vec::new();
    for k in 1..traj.len() {
        let x: Vec<f64> = (0..net.len()).map(|i| traj.neuron(k, i).x).collect();
        let e = muscle.step(&x, cfg.dt);
        assert!((0.0..=1.0).contains(&e));
        if traj.times[k] > 500.0 {
            efforts.push(e);
        }
    }
    let mean = efforts.iter().sum::<f64>() / efforts.len() as f64;
    let (lo, hi) = efforts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    assert!(mean > 0.0);
    assert!((hi - lo) < 0.1 * mean, "ripple {} of mean {mean}", hi - lo);
}
