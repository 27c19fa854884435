//! The three-neuron bistable latch: two mutually exciting regular-spiking
//! cells (`E1`, `E2`) and a low-threshold-spiking reset interneuron (`I`).
//!
//! `E1` is the set input, `I` the reset input and `E2` the output. Weak
//! synapses from both excitatory cells onto `I` prime the reset while the
//! module is active, so a reset pulse that silences an active module can be
//! too weak to fire `I` when the module is already at rest.

use crate::engine::{EngineError, FixedStepper, SimConfig};
use crate::network::{Network, Pulse, SpikeRecord, Synapse};
use crate::neuron::NeuronParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Synaptic conductances (nS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapticParams {
    /// Mutual excitation between `E1` and `E2`.
    pub g_exc: f64,
    /// Reset interneuron onto both excitatory cells.
    pub g_inh: f64,
    /// Excitatory cells onto the reset interneuron.
    pub g_rst: f64,
    /// Output of one module onto `E1` of another.
    pub g_ffw: f64,
    /// Output of one module onto the interneuron of another.
    pub g_fb: f64,
}

impl SynapticParams {
    pub const NOMINAL: SynapticParams = SynapticParams {
        g_exc: 20.0,
        g_inh: 10.0,
        g_rst: 5.0,
        g_ffw: 10.0,
        g_fb: 10.0,
    };

    pub fn get(&self, p: SynapticParam) -> f64 {
        match p {
            SynapticParam::Exc => self.g_exc,
            SynapticParam::Inh => self.g_inh,
            SynapticParam::Rst => self.g_rst,
            SynapticParam::Ffw => self.g_ffw,
            SynapticParam::Fb => self.g_fb,
        }
    }

    pub fn with(mut self, p: SynapticParam, value: f64) -> Self {
        *match p {
            SynapticParam::Exc => &mut self.g_exc,
            SynapticParam::Inh => &mut self.g_inh,
            SynapticParam::Rst => &mut self.g_rst,
            SynapticParam::Ffw => &mut self.g_ffw,
            SynapticParam::Fb => &mut self.g_fb,
        } = value;
        self
    }

    pub fn is_valid(&self) -> bool {
        [self.g_exc, self.g_inh, self.g_rst, self.g_ffw, self.g_fb]
            .iter()
            .all(|g| *g >= 0.0)
    }
}

impl Default for SynapticParams {
    fn default() -> Self {
        Self::NOMINAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SynapticParam {
    Exc,
    Inh,
    Rst,
    Ffw,
    Fb,
}

impl SynapticParam {
    pub fn symbol(self) -> &'static str {
        match self {
            SynapticParam::Exc => "G_exc",
            SynapticParam::Inh => "G_inh",
            SynapticParam::Rst => "G_rst",
            SynapticParam::Ffw => "G_ffw",
            SynapticParam::Fb => "G_fb",
        }
    }
}

/// Neuron indices of one latch inside a (possibly larger) network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatchTopology {
    pub e1: usize,
    pub e2: usize,
    pub i: usize,
}

impl LatchTopology {
    /// Latch occupying indices `offset..offset + 3`.
    pub fn at(offset: usize) -> Self {
        Self {
            e1: offset,
            e2: offset + 1,
            i: offset + 2,
        }
    }

    pub fn set_target(&self) -> usize {
        self.e1
    }

    pub fn reset_target(&self) -> usize {
        self.i
    }

    pub fn output(&self) -> usize {
        self.e2
    }

    /// The six intra-module synapses.
    pub fn synapses(&self, syn: &SynapticParams) -> [Synapse; 6] {
        [
            Synapse::new(self.e1, self.e2, syn.g_exc),
            Synapse::new(self.e2, self.e1, syn.g_exc),
            Synapse::new(self.e1, self.i, syn.g_rst),
            Synapse::new(self.e2, self.i, syn.g_rst),
            Synapse::new(self.i, self.e1, syn.g_inh),
            Synapse::new(self.i, self.e2, syn.g_inh),
        ]
    }
}

/// Builds a latch at rest with identical excitatory cells.
pub fn build_latch(
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
) -> (Network, LatchTopology) {
    build_latch_pair(exc, exc, inh, syn)
}

/// Builds a latch whose two excitatory cells may differ.
pub fn build_latch_pair(
    e1: &NeuronParams,
    e2: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
) -> (Network, LatchTopology) {
    let topo = LatchTopology::at(0);
    let mut net = Network::build(&[*e1, *e2, *inh], &[]).expect("empty synapse list");
    // Synaptic parameters are validated non-negative by construction of the
    // topology; a negative value is a caller bug.
    for s in topo.synapses(syn) {
        net.add_synapse(s)
            .expect("latch synapses are in range and non-negative");
    }
    (net, topo)
}

/// Adds a rectangular current pulse to `target`'s external input. Pulses on
/// the same target add where they overlap.
pub fn stimulate(net: &mut Network, target: usize, amplitude: f64, t0: f64, duration: f64) {
    assert!(duration > 0.0, "pulse duration must be positive");
    net.input_mut(target)
        .pulses
        .push(Pulse::new(t0, duration, amplitude));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Active,
    Inactive,
}

/// Active iff both excitatory cells fired in `(t - window, t]`.
pub fn classify_activity(
    spikes: &SpikeRecord,
    topo: &LatchTopology,
    window: f64,
    t: f64,
) -> Activity {
    assert!(window > 0.0, "classification window must be positive");
    let fired = |n: usize| spikes.times(n).any(|s| s > t - window && s <= t);
    if fired(topo.e1) && fired(topo.e2) {
        Activity::Active
    } else {
        Activity::Inactive
    }
}

/// Default set/reset pulse duration (ms).
pub const PULSE_MS: f64 = 5.0;

#[derive(Debug, Error, PartialEq)]
pub enum LatchError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no pulse amplitude up to {max} pA fires neuron {target}")]
    BracketExhausted { target: usize, max: f64 },
}

/// Runs a copy of `net` with the fixed-step integrator from `t0` to `t1`,
/// returning the spikes.
pub fn run_fixed(net: &mut Network, t0: f64, t1: f64, dt: f64) -> Result<SpikeRecord, EngineError> {
    let mut stepper = FixedStepper::new();
    let mut fired = Vec::new();
    let mut spikes = SpikeRecord::new();
    let steps = ((t1 - t0) / dt).round() as usize;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        fired.clear();
        stepper.step(net, t, dt, &mut fired)?;
        for &i in &fired {
            spikes.push(t + dt, i);
        }
    }
    Ok(spikes)
}

/// Smallest amplitude (to `resolution` pA) of a `duration`-ms pulse applied
/// to `target` at the network's current state that makes `target` fire
/// within `duration + settle` ms.
pub fn firing_threshold(
    net: &Network,
    target: usize,
    duration: f64,
    settle: f64,
    resolution: f64,
    max_amplitude: f64,
    dt: f64,
) -> Result<f64, LatchError> {
    let fires = |amp: f64| -> Result<bool, EngineError> {
        let mut trial = net.clone();
        stimulate(&mut trial, target, amp, 0.0, duration);
        let spikes = run_fixed(&mut trial, 0.0, duration + settle, dt)?;
        let fired = spikes.times(target).next().is_some();
        Ok(fired)
    };
    if !fires(max_amplitude)? {
        return Err(LatchError::BracketExhausted {
            target,
            max: max_amplitude,
        });
    }
    let (mut lo, mut hi) = (0.0, max_amplitude);
    if fires(lo)? {
        return Ok(0.0);
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if fires(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Calibrated set and reset pulse amplitudes: twice the firing threshold of
/// `E1` and `I` at rest for a [`PULSE_MS`] pulse.
pub fn default_pulse_amplitudes(
    net: &Network,
    topo: &LatchTopology,
) -> Result<(f64, f64), LatchError> {
    let mut rest = net.clone();
    rest.reset_to_rest();
    let set = firing_threshold(&rest, topo.e1, PULSE_MS, 20.0, 1.0, 1e5, 0.05)?;
    let reset = firing_threshold(&rest, topo.i, PULSE_MS, 20.0, 1.0, 1e5, 0.05)?;
    Ok((2.0 * set, 2.0 * reset))
}

/// Reset-pulse thresholds of the interneuron while the module is active and
/// while it is at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetThresholds {
    pub active: f64,
    pub inactive: f64,
}

/// Measures the reset-pulse amplitude needed to fire `I` in both module
/// states. The active-state measurement is taken 200 ms after a set pulse,
/// timed just after an `E2` spike so the priming synapses are engaged.
pub fn marginal_reset_property(
    net: &Network,
    topo: &LatchTopology,
    resolution: f64,
    cfg: &SimConfig,
) -> Result<ResetThresholds, LatchError> {
    let dt = cfg.dt.min(0.05);
    let mut rest = net.clone();
    rest.reset_to_rest();
    let inactive = firing_threshold(&rest, topo.i, PULSE_MS, 20.0, resolution, 1e5, dt)?;

    let (set_amp, _) = default_pulse_amplitudes(net, topo)?;
    let mut active = rest.clone();
    stimulate(&mut active, topo.e1, set_amp, 0.0, PULSE_MS);
    run_fixed(&mut active, 0.0, 200.0, dt)?;
    // Continue until E2 fires, so the probe starts at a fixed cycle phase.
    let mut t = 200.0;
    let mut stepper = FixedStepper::new();
    let mut fired = Vec::new();
    loop {
        fired.clear();
        stepper.step(&mut active, t, dt, &mut fired)?;
        t += dt;
        if fired.contains(&topo.e2) || t > 400.0 {
            break;
        }
    }
    active.input_mut(topo.e1).pulses.clear();
    let active_thr = firing_threshold(&active, topo.i, PULSE_MS, 20.0, resolution, 1e5, dt)?;
    Ok(ResetThresholds {
        active: active_thr,
        inactive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal() -> (Network, LatchTopology) {
        build_latch(
            &NeuronParams::RS,
            &NeuronParams::LTS,
            &SynapticParams::NOMINAL,
        )
    }

    #[test]
    fn six_synapses() {
        let (net, topo) = nominal();
        assert_eq!(net.len(), 3);
        assert_eq!(net.nonzero_synapses(), 6);
        assert_eq!(net.conductance(topo.e2, topo.e1), 20.0);
        assert_eq!(net.conductance(topo.e1, topo.e2), 20.0);
        assert_eq!(net.conductance(topo.i, topo.e1), 5.0);
        assert_eq!(net.conductance(topo.i, topo.e2), 5.0);
        assert_eq!(net.conductance(topo.e1, topo.i), 10.0);
        assert_eq!(net.conductance(topo.e2, topo.i), 10.0);
        assert_eq!(topo.set_target(), 0);
        assert_eq!(topo.output(), 1);
        assert_eq!(topo.reset_target(), 2);
    }

    #[test]
    fn classification() {
        let topo = LatchTopology::at(0);
        let empty = SpikeRecord::new();
        assert_eq!(
            classify_activity(&empty, &topo, 50.0, 100.0),
            Activity::Inactive
        );
        let mut rec = SpikeRecord::new();
        rec.push(60.0, 0);
        rec.push(70.0, 1);
        assert_eq!(
            classify_activity(&rec, &topo, 50.0, 100.0),
            Activity::Active
        );
        assert_eq!(
            classify_activity(&rec, &topo, 35.0, 100.0),
            Activity::Inactive
        );
        assert_eq!(
            classify_activity(&rec, &topo, 50.0, 65.0),
            Activity::Inactive
        );
    }

    #[test]
    fn zero_amplitude_pulse_changes_nothing() {
        let (mut a, topo) = nominal();
        let mut b = a.clone();
        stimulate(&mut b, topo.e1, 0.0, 10.0, 5.0);
        let sa = run_fixed(&mut a, 0.0, 100.0, 0.1).unwrap();
        let sb = run_fixed(&mut b, 0.0, 100.0, 0.1).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(a.flat_state(), b.flat_state());
    }

    #[test]
    fn overlapping_pulses_sum() {
        let (mut net, topo) = nominal();
        stimulate(&mut net, topo.i, 30.0, 0.0, 10.0);
        stimulate(&mut net, topo.i, 12.0, 5.0, 10.0);
        assert_eq!(net.external_current(topo.i, 7.0), 42.0);
        assert_eq!(net.external_current(topo.i, 12.0), 12.0);
    }
}
