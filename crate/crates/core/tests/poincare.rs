use proptest::prelude::*;
use spikelatch::latch::{build_latch, SynapticParam, SynapticParams};
use spikelatch::poincare::*;
use spikelatch::{NeuronParam, NeuronParams, NeuronState};

fn nominal_system() -> LatchSystem {
    let (net, topo) = build_latch(
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &SynapticParams::NOMINAL,
    );
    LatchSystem::new(net, topo, PoincareConfig::default())
}

fn verdict(syn: &SynapticParams) -> Verdict {
    let cfg = PoincareConfig::default();
    assess(
        &NeuronParams::RS,
        &NeuronParams::RS,
        &NeuronParams::LTS,
        syn,
        &cfg,
    )
    .unwrap()
    .verdict
}

#[test]
fn fixed_point_maps_to_itself() {
    let mut sys = nominal_system();
    let report = sys.find_limit_cycle().unwrap();
    assert_eq!(report.verdict, Verdict::Viable);
    let period = report.period.unwrap();
    assert!(period > 5.0 && period < 50.0, "period {period}");
    let fp = report.fixed_point.unwrap();
    match sys.return_map(&fp).unwrap() {
        Return::Hit { state, elapsed } => {
            for (a, b) in state.iter().zip(&fp) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
            }
            assert!((elapsed - period).abs() < 1e-6 * period);
        }
        Return::NoReturn => panic!("fixed point does not return"),
    }
}

#[test]
fn picard_iteration_contracts() {
    let mut sys = nominal_system();
    sys.find_limit_cycle().unwrap();
    let d = sys.picard_distances();
    assert!(d.len() >= 3);
    assert!(*d.last().unwrap() < 1e-5);
    // Geometric convergence once near the cycle.
    let tail = &d[d.len() / 2..];
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn zeroed_activations_do_not_return() {
    let mut sys = nominal_system();
    let mut y = sys.initial_section_point();
    for i in 0..3 {
        y[i * NeuronState::DIM + 2] = 0.0;
        y[i * NeuronState::DIM + 3] = 0.0;
    }
    assert_eq!(sys.return_map(&y).unwrap(), Return::NoReturn);
}

#[test]
fn off_section_state_is_rejected() {
    let mut sys = nominal_system();
    let mut y = sys.initial_section_point();
    y[0] += 1.0;
    assert_eq!(sys.return_map(&y), Err(PoincareError::NotOnSection));
    assert_eq!(sys.return_map(&y[..4]), Err(PoincareError::NotOnSection));
}

#[test]
fn excitation_bounds() {
    assert_eq!(
        verdict(&SynapticParams::NOMINAL.with(SynapticParam::Exc, 10.0)),
        Verdict::RestsGlobally
    );
    assert_ne!(
        verdict(&SynapticParams::NOMINAL.with(SynapticParam::Exc, 40.0)),
        Verdict::Viable
    );
}

#[test]
fn inhibition_bounds() {
    assert_eq!(verdict(&SynapticParams::NOMINAL), Verdict::Viable);
    assert_ne!(
        verdict(&SynapticParams::NOMINAL.with(SynapticParam::Inh, 2.0)),
        Verdict::Viable
    );
    assert_eq!(
        verdict(&SynapticParams::NOMINAL.with(SynapticParam::Inh, 1000.0)),
        Verdict::Viable
    );
}

#[test]
fn inhibition_monotone_above_minimum() {
    let mut seen_viable = false;
    for g in [
        2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 20.0, 50.0, 100.0, 300.0, 1000.0,
    ] {
        let ok = verdict(&SynapticParams::NOMINAL.with(SynapticParam::Inh, g)) == Verdict::Viable;
        assert!(ok || !seen_viable, "viability lost again at G_inh = {g}");
        seen_viable |= ok;
    }
    assert!(seen_viable);
}

fn scan(param: ScanParam, dir: Direction, syn: &SynapticParams) -> f64 {
    scan_param_range(
        param,
        dir,
        &NeuronParams::RS,
        &NeuronParams::LTS,
        syn,
        &PoincareConfig::default(),
        1e-3,
    )
    .unwrap()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

#[test]
fn capacitance_lower_bound() {
    let c = scan(
        ScanParam::Neuron(NeuronParam::Cap),
        Direction::Down,
        &SynapticParams::NOMINAL,
    );
    assert!(within(c, 68.3, 0.02), "{c}");
}

#[test]
fn tau_upper_bound() {
    let t = scan(
        ScanParam::Neuron(NeuronParam::Tau),
        Direction::Up,
        &SynapticParams::NOMINAL,
    );
    assert!(within(t, 7.41, 0.02), "{t}");
}

#[test]
fn reversal_potential_upper_bound() {
    let v = scan(
        ScanParam::Neuron(NeuronParam::VRev),
        Direction::Up,
        &SynapticParams::NOMINAL,
    );
    assert!(within(v, 9.7, 0.02), "{v}");
}

#[test]
fn peak_voltage_is_unbounded_above() {
    let v = scan(
        ScanParam::Neuron(NeuronParam::VPeak),
        Direction::Up,
        &SynapticParams::NOMINAL,
    );
    assert_eq!(v, f64::INFINITY);
}

#[test]
fn nominal_must_be_viable_to_scan() {
    let syn = SynapticParams::NOMINAL.with(SynapticParam::Exc, 10.0);
    let err = scan_param_range(
        ScanParam::Neuron(NeuronParam::Tau),
        Direction::Up,
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &syn,
        &PoincareConfig::default(),
        1e-3,
    )
    .unwrap_err();
    assert_eq!(err, PoincareError::NominalNotViable(Verdict::RestsGlobally));
}

/// Numeric root of the reduced voltage dynamics by bisection on a sign
/// change, independent of the closed form.
fn numeric_roots(p: &NeuronParams) -> Vec<f64> {
    let f = |v: f64| p.k * (v - p.v_r) * (v - p.v_t) - p.b * (v - p.v_r);
    let mut roots = Vec::new();
    let (lo, hi, n) = (-200.0, 200.0, 40_000);
    let h = (hi - lo) / n as f64;
    for i in 0..n {
        let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        if f(a) == 0.0 {
            roots.push(a);
            continue;
        }
        if f(a).signum() == f(b).signum() {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if f(a).signum() == f(m).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

proptest! {
    #[test]
    fn resting_points_match_numeric_roots(
        k in 0.2..2.0f64,
        b in -10.0..10.0f64,
        v_r in -70.0..-50.0f64,
        gap in 5.0..30.0f64,
    ) {
        let p = NeuronParams { k, b, v_r, v_t: v_r + gap, ..NeuronParams::RS };
        let r = resting_fixed_point(&p);
        prop_assume!(r.kind == RestKind::NodeAndSaddle && (r.saddle - r.node).abs() > 1e-3);
        let roots = numeric_roots(&p);
        prop_assert_eq!(roots.len(), 2);
        prop_assert!((roots[0] - r.node).abs() < 1e-9);
        prop_assert!((roots[1] - r.saddle).abs() < 1e-9);
        // The node attracts: f' < 0 there.
        let slope = k * (2.0 * r.node - v_r - p.v_t) - b;
        prop_assert!(slope < 0.0);
    }
}

#[test]
fn transcritical_when_roots_coincide() {
    for (k, gap) in [(0.7, 20.0), (1.0, 14.0), (0.5, 8.0)] {
        let p = NeuronParams {
            k,
            v_t: NeuronParams::RS.v_r + gap,
            b: -k * gap,
            ..NeuronParams::RS
        };
        let r = resting_fixed_point(&p);
        assert_eq!(r.kind, RestKind::Transcritical);
        assert!((r.node - p.v_r).abs() < 1e-9 && (r.saddle - p.v_r).abs() < 1e-9);
    }
}

// Without the self-reset pathway the cycle survives far beyond the nominal
// bound; the reset check (driven interneuron) is what fails near 19.4 mV.
#[test]
fn removing_reset_synapse_lifts_reversal_bound() {
    let syn = SynapticParams::NOMINAL.with(SynapticParam::Rst, 0.0);
    let v = scan(ScanParam::Neuron(NeuronParam::VRev), Direction::Up, &syn);
    assert!(v > 1.5 * 9.7, "{v}");
    let e = NeuronParams::RS.with(NeuronParam::VRev, 25.0);
    let (net, topo) = build_latch(&e, &NeuronParams::LTS, &syn);
    let report = LatchSystem::new(net, topo, PoincareConfig::default())
        .find_limit_cycle()
        .unwrap();
    assert_eq!(report.verdict, Verdict::Viable);
}
