//! Networks of conductance-coupled neurons, external current sources, spike
//! records and the non-spiking muscle cells that turn activity into effort.

use crate::neuron::{NeuronParams, NeuronState};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("synapse {pre} -> {post} references a neuron outside 0..{len}")]
    IndexOutOfRange { pre: usize, post: usize, len: usize },
    #[error("synapse {pre} -> {post} has negative conductance {g} nS")]
    NegativeConductance { pre: usize, post: usize, g: f64 },
}

/// One directed synapse with its peak conductance (nS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub conductance: f64,
}

impl Synapse {
    pub fn new(pre: usize, post: usize, conductance: f64) -> Self {
        Self {
            pre,
            post,
            conductance,
        }
    }
}

/// Rectangular current pulse, active on `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub start: f64,
    pub duration: f64,
    pub amplitude: f64,
}

impl Pulse {
    pub fn new(start: f64, duration: f64, amplitude: f64) -> Self {
        Self {
            start,
            duration,
            amplitude,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        if t >= self.start && t < self.end() {
            self.amplitude
        } else {
            0.0
        }
    }
}

type CurrentFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time-varying external current for one neuron (pA): a constant bias, a
/// schedule of rectangular pulses (overlapping pulses add) and an optional
/// caller-supplied function of time.
#[derive(Clone, Default)]
pub struct ExternalInput {
    pub bias: f64,
    pub pulses: Vec<Pulse>,
    custom: Option<CurrentFn>,
}

impl fmt::Debug for ExternalInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalInput")
            .field("bias", &self.bias)
            .field("pulses", &self.pulses)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl ExternalInput {
    pub fn with_function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            custom: Some(Arc::new(f)),
            ..Self::default()
        }
    }

    pub fn set_function(&mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) {
        self.custom = Some(Arc::new(f));
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let mut i = self.bias;
        for p in &self.pulses {
            i += p.at(t);
        }
        if let Some(f) = &self.custom {
            i += f(t);
        }
        i
    }

    /// Times at which the pulse schedule is discontinuous.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pulses.iter().flat_map(|p| [p.start, p.end()])
    }
}

/// Neurons plus the dense matrix of peak conductances. Entry `(post, pre)`
/// is the conductance a spike in `pre` opens in `post`; the sign of its
/// effect comes from the presynaptic reversal potential.
#[derive(Debug, Clone)]
pub struct Network {
    cells: Vec<NeuronParams>,
    states: Vec<NeuronState>,
    conductance: Vec<f64>,
    inputs: Vec<ExternalInput>,
}

impl Network {
    /// Builds a network at rest. Duplicate `(pre, post)` pairs add.
    pub fn build(cells: &[NeuronParams], synapses: &[Synapse]) -> Result<Self, NetworkError> {
        let n = cells.len();
        let mut net = Network {
            cells: cells.to_vec(),
            states: cells.iter().map(NeuronParams::rest_state).collect(),
            conductance: vec![0.0; n * n],
            inputs: vec![ExternalInput::default(); n],
        };
        for s in synapses {
            net.add_synapse(*s)?;
        }
        Ok(net)
    }

    pub fn add_synapse(&mut self, s: Synapse) -> Result<(), NetworkError> {
        let n = self.len();
        if s.pre >= n || s.post >= n {
            return Err(NetworkError::IndexOutOfRange {
                pre: s.pre,
                post: s.post,
                len: n,
            });
        }
        if !(s.conductance >= 0.0) {
            return Err(NetworkError::NegativeConductance {
                pre: s.pre,
                post: s.post,
                g: s.conductance,
            });
        }
        self.conductance[s.post * n + s.pre] += s.conductance;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn params(&self, i: usize) -> &NeuronParams {
        &self.cells[i]
    }

    pub fn params_mut(&mut self, i: usize) -> &mut NeuronParams {
        &mut self.cells[i]
    }

    pub fn all_params(&self) -> &[NeuronParams] {
        &self.cells
    }

    pub fn state(&self, i: usize) -> &NeuronState {
        &self.states[i]
    }

    pub fn states(&self) -> &[NeuronState] {
        &self.states
    }

    pub fn set_state(&mut self, i: usize, s: NeuronState) {
        self.states[i] = s;
    }

    /// Puts every neuron back to `v = V_r`, `u = x = y = 0`.
    pub fn reset_to_rest(&mut self) {
        for (s, p) in self.states.iter_mut().zip(&self.cells) {
            *s = p.rest_state();
        }
    }

    pub fn conductance(&self, post: usize, pre: usize) -> f64 {
        self.conductance[post * self.len() + pre]
    }

    pub fn set_conductance(&mut self, post: usize, pre: usize, g: f64) {
        assert!(g >= 0.0, "conductances are non-negative");
        let n = self.len();
        self.conductance[post * n + pre] = g;
    }

    /// Row-major `(post, pre)` conductance matrix.
    pub fn conductance_matrix(&self) -> &[f64] {
        &self.conductance
    }

    pub fn nonzero_synapses(&self) -> usize {
        self.conductance.iter().filter(|&&g| g != 0.0).count()
    }

    pub fn input(&self, i: usize) -> &ExternalInput {
        &self.inputs[i]
    }

    pub fn input_mut(&mut self, i: usize) -> &mut ExternalInput {
        &mut self.inputs[i]
    }

    pub fn external_current(&self, i: usize, t: f64) -> f64 {
        self.inputs[i].at(t)
    }

    /// Sorted, deduplicated pulse edges across all external inputs.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.inputs.iter().flat_map(|i| i.breakpoints()).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Conductance-weighted synaptic current into neuron `i` at the current
    /// states, excluding external sources.
    pub fn synaptic_current(&self, i: usize) -> f64 {
        let n = self.len();
        let v = self.states[i].v;
        let row = &self.conductance[i * n..(i + 1) * n];
        row.iter()
            .zip(&self.states)
            .zip(&self.cells)
            .map(|((g, s), p)| g * s.x * (p.v_n - v))
            .sum()
    }

    /// Total input current into neuron `i` at time `t`: synaptic plus external.
    pub fn input_current(&self, i: usize, t: f64) -> f64 {
        self.synaptic_current(i) + self.external_current(i, t)
    }

    /// States flattened as `[v0, u0, x0, y0, v1, ...]`.
    pub fn flat_state(&self) -> Vec<f64> {
        self.states.iter().flat_map(|s| s.to_array()).collect()
    }

    pub fn set_flat_state(&mut self, y: &[f64]) {
        assert_eq!(y.len(), self.len() * NeuronState::DIM);
        for (s, chunk) in self.states.iter_mut().zip(y.chunks_exact(NeuronState::DIM)) {
            *s = NeuronState::from_slice(chunk);
        }
    }

    /// Vector field on a flat state with the given per-neuron external
    /// currents.
    #[inline]
    pub fn rhs_with_external(&self, y: &[f64], external: &[f64], dy: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let p = &self.cells[i];
            let base = i * NeuronState::DIM;
            let v = y[base];
            let row = &self.conductance[i * n..(i + 1) * n];
            let mut syn = 0.0;
            for j in 0..n {
                let g = row[j];
                if g != 0.0 {
                    syn += g * y[j * NeuronState::DIM + 2] * (self.cells[j].v_n - v);
                }
            }
            let u = y[base + 1];
            let x = y[base + 2];
            let yy = y[base + 3];
            dy[base] = (p.k * (v - p.v_r) * (v - p.v_t) - u + syn + external[i]) / p.cap;
            dy[base + 1] = p.a * (p.b * (v - p.v_r) - u);
            dy[base + 2] = yy / p.tau;
            dy[base + 3] = -(2.0 * yy + x) / p.tau;
        }
    }

    pub fn external_currents(&self, t: f64, out: &mut [f64]) {
        for (o, inp) in out.iter_mut().zip(&self.inputs) {
            *o = inp.at(t);
        }
    }
}

/// Time-stamped spike events across a network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub events: Vec<(f64, usize)>,
}

impl SpikeRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, neuron: usize) {
        self.events.push((t, neuron));
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self, neuron: usize) -> impl Iterator<Item = f64> + '_ {
        self.events
            .iter()
            .filter(move |(_, n)| *n == neuron)
            .map(|(t, _)| *t)
    }

    /// Spikes of `neuron` with time in `[t0, t1)`.
    pub fn count_in(&self, neuron: usize, t0: f64, t1: f64) -> usize {
        self.times(neuron).filter(|&t| t >= t0 && t < t1).count()
    }

    pub fn last_before(&self, neuron: usize, t: f64) -> Option<f64> {
        self.times(neuron).filter(|&s| s <= t).last()
    }

    /// Merges another record whose events are all later than this one's.
    pub fn extend(&mut self, other: &SpikeRecord) {
        self.events.extend_from_slice(&other.events);
    }
}

/// Default time constant of a muscle cell (ms).
pub const MUSCLE_TAU_MS: f64 = 50.0;

/// Non-spiking muscle cell: a leaky first-order integrator of presynaptic
/// activation whose depolarization, scaled and clamped to `[0, 1]`, is the
/// actuation effort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuscleCell {
    /// Depolarization relative to rest (mV).
    pub v_m: f64,
    pub tau_m: f64,
    /// Effort per mV of depolarization.
    pub gain: f64,
    /// Input resistance (mV/pA).
    pub resistance: f64,
    /// Resting potential that sets the synaptic driving force (mV).
    pub rest: f64,
    /// Reversal potential of the driving synapses (mV).
    pub reversal: f64,
    /// `(presynaptic neuron, conductance nS)`.
    pub sources: Vec<(usize, f64)>,
}

/// Shape constants shared by all muscle cells of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuscleConfig {
    pub tau_m: f64,
    /// Effort per mV of depolarization. The default puts the effort of a
    /// muscle driven by one active module at about 0.8.
    pub gain: f64,
    pub resistance: f64,
    pub rest: f64,
    pub reversal: f64,
    /// Conductance from each excitatory cell of a module onto a muscle (nS).
    pub conductance: f64,
}

impl Default for MuscleConfig {
    fn default() -> Self {
        Self {
            tau_m: MUSCLE_TAU_MS,
            gain: 0.055,
            resistance: 0.1,
            rest: -60.0,
            reversal: 0.0,
            conductance: 10.0,
        }
    }
}

impl MuscleCell {
    pub fn new(cfg: &MuscleConfig, sources: Vec<(usize, f64)>) -> Self {
        Self {
            v_m: 0.0,
            tau_m: cfg.tau_m,
            gain: cfg.gain,
            resistance: cfg.resistance,
            rest: cfg.rest,
            reversal: cfg.reversal,
            sources,
        }
    }

    pub fn effort(&self) -> f64 {
        (self.gain * self.v_m).clamp(0.0, 1.0)
    }

    /// Synaptic drive (pA) given the activations of every neuron in the
    /// network the sources index into.
    pub fn drive(&self, presyn_x: &[f64]) -> f64 {
        self.sources
            .iter()
            .map(|&(j, g)| g * presyn_x[j] * (self.reversal - self.rest))
            .sum()
    }

    /// Advances by `dt` holding the drive constant over the step (exact
    /// exponential update) and returns the new effort.
    pub fn step(&mut self, presyn_x: &[f64], dt: f64) -> f64 {
        assert!(dt > 0.0, "muscle step needs dt > 0");
        let target = self.resistance * self.drive(presyn_x);
        let decay = (-dt / self.tau_m).exp();
        self.v_m = target + (self.v_m - target) * decay;
        self.effort()
    }
}

/// Functional form of [`MuscleCell::step`].
pub fn muscle_step(mut m: MuscleCell, presyn_x: &[f64], dt: f64) -> (MuscleCell, f64) {
    let e = m.step(presyn_x, dt);
    (m, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(g: f64) -> Network {
        Network::build(
            &[NeuronParams::RS, NeuronParams::RS],
            &[Synapse::new(0, 1, g), Synapse::new(1, 0, g)],
        )
        .unwrap()
    }

    #[test]
    fn empty_synapses_give_zero_matrix() {
        let net = Network::build(&[NeuronParams::RS; 3], &[]).unwrap();
        assert!(net.conductance_matrix().iter().all(|&g| g == 0.0));
        for i in 0..3 {
            assert_eq!(*net.state(i), NeuronParams::RS.rest_state());
        }
    }

    #[test]
    fn duplicates_add() {
        let net = Network::build(
            &[NeuronParams::RS; 2],
            &[Synapse::new(0, 1, 3.0), Synapse::new(0, 1, 4.5)],
        )
        .unwrap();
        assert_eq!(net.conductance(1, 0), 7.5);
        assert_eq!(net.conductance(0, 1), 0.0);
    }

    #[test]
    fn mutual_pair() {
        let net = pair(20.0);
        assert_eq!(net.conductance(0, 1), 20.0);
        assert_eq!(net.conductance(1, 0), 20.0);
        assert_eq!(net.nonzero_synapses(), 2);
    }

    #[test]
    fn build_errors() {
        let e = Network::build(&[NeuronParams::RS; 2], &[Synapse::new(0, 2, 1.0)]).unwrap_err();
        assert!(matches!(e, NetworkError::IndexOutOfRange { .. }));
        let e = Network::build(&[NeuronParams::RS; 2], &[Synapse::new(0, 1, -1.0)]).unwrap_err();
        assert!(matches!(e, NetworkError::NegativeConductance { .. }));
    }

    #[test]
    fn quiescent_network_sees_only_external_current() {
        let mut net = pair(20.0);
        net.input_mut(1).bias = 12.5;
        net.input_mut(1).pulses.push(Pulse::new(10.0, 5.0, 100.0));
        assert_eq!(net.input_current(1, 0.0), 12.5);
        assert_eq!(net.input_current(1, 12.0), 112.5);
        assert_eq!(net.input_current(1, 15.0), 12.5);
        assert_eq!(net.input_current(0, 12.0), 0.0);
    }

    #[test]
    fn excitatory_current_at_alpha_peak() {
        let mut net = pair(20.0);
        let peak = (-1.0f64).exp();
        net.set_state(0, NeuronState::new(-60.0, 0.0, peak, 0.0));
        // 20 nS * e^-1 * (0 - (-60)) mV
        assert_relative_eq!(net.synaptic_current(1), 441.455, epsilon = 1e-3);
        assert_relative_eq!(net.synaptic_current(1), 20.0 * peak * 60.0, epsilon = 1e-12);
    }

    #[test]
    fn inhibitory_current_is_negative() {
        let mut net = Network::build(
            &[NeuronParams::RS, NeuronParams::LTS],
            &[Synapse::new(1, 0, 10.0)],
        )
        .unwrap();
        for x in [1e-6, 0.1, 0.5, 2.0] {
            net.set_state(1, NeuronState::new(-56.0, 0.0, x, 0.0));
            assert!(net.synaptic_current(0) < 0.0);
        }
    }

    #[test]
    fn custom_function_input() {
        let mut net = pair(1.0);
        net.input_mut(0).set_function(|t| 2.0 * t);
        net.input_mut(0).bias = 1.0;
        assert_eq!(net.input_current(0, 3.0), 7.0);
    }

    #[test]
    fn flat_state_round_trip() {
        let mut net = pair(1.0);
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        net.set_flat_state(&y);
        assert_eq!(net.flat_state(), y);
        assert_eq!(*net.state(1), NeuronState::new(5.0, 6.0, 7.0, 8.0));
    }

    #[test]
    fn rhs_matches_single_neuron_derivatives() {
        let mut net = pair(20.0);
        net.set_state(0, NeuronState::new(-55.0, 3.0, 0.2, 0.1));
        net.set_state(1, NeuronState::new(-45.0, -7.0, 0.05, -0.02));
        let y = net.flat_state();
        let mut dy = vec![0.0; 8];
        net.rhs_with_external(&y, &[5.0, 0.0], &mut dy);
        for i in 0..2 {
            let i_in = net.synaptic_current(i) + if i == 0 { 5.0 } else { 0.0 };
            let d = crate::neuron::derivatives(net.params(i), net.state(i), i_in);
            assert_relative_eq!(dy[4 * i], d.v, epsilon = 1e-12);
            assert_relative_eq!(dy[4 * i + 1], d.u, epsilon = 1e-12);
            assert_relative_eq!(dy[4 * i + 2], d.x, epsilon = 1e-12);
            assert_relative_eq!(dy[4 * i + 3], d.y, epsilon = 1e-12);
        }
    }

    #[test]
    fn muscle_decays_without_input() {
        let cfg = MuscleConfig::default();
        let mut m = MuscleCell::new(&cfg, vec![(0, 10.0)]);
        m.v_m = 10.0;
        let (m2, _) = muscle_step(m.clone(), &[0.0], 2.0);
        assert_relative_eq!(m2.v_m, 10.0 * (-2.0 / cfg.tau_m).exp(), epsilon = 1e-12);
    }

    #[test]
    fn muscle_effort_is_clamped_and_monotone() {
        let cfg = MuscleConfig::default();
        let mut m = MuscleCell::new(&cfg, vec![]);
        let mut last = f64::NEG_INFINITY;
        for v in [-50.0, -1.0, 0.0, 5.0, 20.0, 40.0, 1e3, 1e6] {
            m.v_m = v;
            let e = m.effort();
            assert!((0.0..=1.0).contains(&e));
            assert!(e >= last);
            last = e;
        }
    }

    proptest::proptest! {
        #[test]
        fn current_is_linear_in_conductance(g1 in 0.0..50.0f64, g2 in 0.0..50.0f64,
                                            h1 in 0.0..50.0f64, h2 in 0.0..50.0f64,
                                            x0 in 0.0..1.0f64, x1 in 0.0..1.0f64,
                                            v0 in -80.0..30.0f64, v1 in -80.0..30.0f64) {
            let cells = [NeuronParams::RS, NeuronParams::LTS];
            let build = |a: f64, b: f64| {
                let mut n = Network::build(&cells, &[Synapse::new(0, 1, a), Synapse::new(1, 0, b)]).unwrap();
                n.set_state(0, NeuronState::new(v0, 0.0, x0, 0.0));
                n.set_state(1, NeuronState::new(v1, 0.0, x1, 0.0));
                n
            };
            let sum = build(g1 + h1, g2 + h2);
            let a = build(g1, g2);
            let b = build(h1, h2);
            for i in 0..2 {
                let lhs = sum.synaptic_current(i);
                let rhs = a.synaptic_current(i) + b.synaptic_current(i);
                proptest::prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn excitatory_sign(x in 0.0..2.0f64, v in -100.0..-1e-9f64, g in 0.0..100.0f64) {
            let mut net = Network::build(&[NeuronParams::RS; 2], &[Synapse::new(0, 1, g)]).unwrap();
            net.set_state(0, NeuronState::new(-60.0, 0.0, x, 0.0));
            net.set_state(1, NeuronState::new(v, 0.0, 0.0, 0.0));
            proptest::prop_assert!(net.synaptic_current(1) >= 0.0);
        }

        #[test]
        fn muscle_effort_in_unit_interval(x in 0.0..5.0f64, dt in 0.01..50.0f64, steps in 1usize..50) {
            let mut m = MuscleCell::new(&MuscleConfig::default(), vec![(0, 10.0)]);
            for _ in 0..steps {
                let e = m.step(&[x], dt);
                proptest::prop_assert!((0.0..=1.0).contains(&e));
            }
        }
    }
}
