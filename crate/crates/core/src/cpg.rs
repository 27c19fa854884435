//! Four latches in a ring as a one-hot state machine driving four linear
//! actuators through eight muscle cells, with optional proprioceptive
//! gating and a second, reversed ring switched in by a trigger neuron.
//!
//! Module `m` excites `E1` of its successor and, through the successor's
//! output, is reset by it. Actuation phase `p` extends actuator `p` and
//! retracts its opposite `(p + 2) % 4`; actuators 0/2 and 1/3 form the
//! opposite pairs.

use crate::engine::{EngineError, FixedStepper};
use crate::latch::{
    default_pulse_amplitudes, stimulate, LatchError, LatchTopology, SynapticParams, PULSE_MS,
};
use crate::network::{MuscleCell, MuscleConfig, Network, SpikeRecord, Synapse};
use crate::neuron::NeuronParams;
use serde::{Deserialize, Serialize};

pub const MODULES: usize = 4;
pub const ACTUATORS: usize = 4;
pub const MUSCLES: usize = 2 * ACTUATORS;

/// Default proprioceptive feedback constant (pA).
pub const DEFAULT_KP: f64 = 25.0;

pub fn successor(m: usize) -> usize {
    (m + 1) % MODULES
}

pub fn predecessor(m: usize) -> usize {
    (m + MODULES - 1) % MODULES
}

pub fn opposite(actuator: usize) -> usize {
    (actuator + 2) % ACTUATORS
}

/// Muscle index of the extensor of `actuator`.
pub fn extensor(actuator: usize) -> usize {
    2 * actuator
}

/// Muscle index of the flexor of `actuator`.
pub fn flexor(actuator: usize) -> usize {
    2 * actuator + 1
}

/// Module letter for reports.
pub fn module_name(m: usize) -> char {
    (b'A' + m as u8) as char
}

/// One ring of four latches and the actuation phase each module commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ring {
    pub modules: [LatchTopology; MODULES],
    pub phases: [usize; MODULES],
}

impl Ring {
    /// Actuator whose extension module `m`'s feedback waits for: the one
    /// extended by its predecessor.
    pub fn awaited_actuator(&self, m: usize) -> usize {
        self.phases[predecessor(m)]
    }
}

/// Forward phase order: module `m` commands phase `m`.
pub const FORWARD_PHASES: [usize; MODULES] = [0, 1, 2, 3];
/// Reverse phase order: the gait run backwards, `p(m) = (4 - m) % 4`.
pub const REVERSE_PHASES: [usize; MODULES] = [0, 3, 2, 1];

/// One or more rings sharing a network and the eight muscles, optionally
/// with a trigger neuron that switches from the first ring to the second.
#[derive(Debug, Clone)]
pub struct RingCpg {
    pub network: Network,
    pub rings: Vec<Ring>,
    pub muscles: Vec<MuscleCell>,
    pub trigger: Option<usize>,
}

impl RingCpg {
    pub fn neuron_count(&self) -> usize {
        self.network.len()
    }

    /// Synapses between distinct modules (and from the trigger).
    pub fn inter_module_synapses(&self) -> usize {
        let module_of = |i: usize| i / 3;
        let n = self.network.len();
        let mut count = 0;
        for post in 0..n {
            for pre in 0..n {
                if self.network.conductance(post, pre) > 0.0
                    && (module_of(post) != module_of(pre)
                        || Some(pre) == self.trigger
                        || Some(post) == self.trigger)
                {
                    count += 1;
                }
            }
        }
        count
    }
}

fn add_ring(net: &mut Network, offset: usize, syn: &SynapticParams) -> [LatchTopology; MODULES] {
    let modules: [LatchTopology; MODULES] =
        std::array::from_fn(|m| LatchTopology::at(offset + 3 * m));
    for t in &modules {
        for s in t.synapses(syn) {
            net.add_synapse(s).expect("ring synapses are in range");
        }
    }
    for m in 0..MODULES {
        let (here, next) = (modules[m], modules[successor(m)]);
        net.add_synapse(Synapse::new(here.output(), next.set_target(), syn.g_ffw))
            .expect("in range");
        net.add_synapse(Synapse::new(next.output(), here.reset_target(), syn.g_fb))
            .expect("in range");
    }
    modules
}

fn muscles_for(rings: &[Ring], cfg: &MuscleConfig) -> Vec<MuscleCell> {
    let mut sources: Vec<Vec<(usize, f64)>> = vec![Vec::new(); MUSCLES];
    for ring in rings {
        for (t, &phase) in ring.modules.iter().zip(&ring.phases) {
            for cell in [t.e1, t.e2] {
                sources[extensor(phase)].push((cell, cfg.conductance));
                sources[flexor(opposite(phase))].push((cell, cfg.conductance));
            }
        }
    }
    sources
        .into_iter()
        .map(|s| MuscleCell::new(cfg, s))
        .collect()
}

/// Twelve-neuron forward ring at rest.
pub fn build_ring(
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    muscle: &MuscleConfig,
) -> RingCpg {
    let cells: Vec<NeuronParams> = (0..MODULES).flat_map(|_| [*exc, *exc, *inh]).collect();
    let mut network = Network::build(&cells, &[]).expect("no synapses yet");
    let modules = add_ring(&mut network, 0, syn);
    let rings = vec![Ring {
        modules,
        phases: FORWARD_PHASES,
    }];
    let muscles = muscles_for(&rings, muscle);
    RingCpg {
        network,
        rings,
        muscles,
        trigger: None,
    }
}

/// Forward ring, reverse ring and a trigger neuron (25 cells). The trigger
/// excites every forward interneuron at `G_fb` and the reverse ring's
/// entry module at `G_ffw`.
pub fn build_reversal(
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    muscle: &MuscleConfig,
) -> RingCpg {
    let mut cells: Vec<NeuronParams> = (0..2 * MODULES).flat_map(|_| [*exc, *exc, *inh]).collect();
    cells.push(*exc);
    let trigger = cells.len() - 1;
    let mut network = Network::build(&cells, &[]).expect("no synapses yet");
    let forward = add_ring(&mut network, 0, syn);
    let reverse = add_ring(&mut network, 3 * MODULES, syn);
    for t in &forward {
        network
            .add_synapse(Synapse::new(trigger, t.reset_target(), syn.g_fb))
            .expect("in range");
    }
    network
        .add_synapse(Synapse::new(trigger, reverse[0].set_target(), syn.g_ffw))
        .expect("in range");
    let rings = vec![
        Ring {
            modules: forward,
            phases: FORWARD_PHASES,
        },
        Ring {
            modules: reverse,
            phases: REVERSE_PHASES,
        },
    ];
    let muscles = muscles_for(&rings, muscle);
    RingCpg {
        network,
        rings,
        muscles,
        trigger: Some(trigger),
    }
}

/// Feedback current onto the excitatory cells of a module whose
/// predecessor's actuator is at `z_prev` and its opposite at `z_opp`. Zero
/// once the previous phase has completed, `-2 k_p` at the far extreme.
pub fn proprioceptive_current(z_prev: f64, z_opp: f64, k_p: f64) -> f64 {
    -k_p * (1.0 + z_opp - z_prev)
}

/// Linear damped-mass actuators (positions as fractions of stroke, time
/// in ms). The defaults give a 20 ms velocity time constant and a full
/// stroke in about 500 ms at the effort of one active module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// Inertia (effort · ms² per stroke).
    pub mass: f64,
    /// Damping (effort · ms per stroke).
    pub damping: f64,
    /// Largest speed (stroke per ms).
    pub slew_max: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            mass: 8000.0,
            damping: 400.0,
            slew_max: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub z: [f64; ACTUATORS],
    pub zdot: [f64; ACTUATORS],
}

impl PlantState {
    pub fn at_rest(z: [f64; ACTUATORS]) -> Self {
        Self {
            z,
            zdot: [0.0; ACTUATORS],
        }
    }
}

/// Advances the actuators by `dt` with muscle efforts held constant. Net
/// drive on actuator `i` is its extensor minus its flexor effort. The
/// damped-mass update is exact for constant drive; speed is then limited
/// to `slew_max` and position to `[0, 1]`, stopping at the ends.
pub fn plant_step(
    ps: &PlantState,
    cfg: &PlantConfig,
    efforts: &[f64; MUSCLES],
    dt: f64,
) -> PlantState {
    assert!(dt > 0.0, "plant step needs dt > 0");
    let mut out = *ps;
    let rate = cfg.damping / cfg.mass;
    let decay = (-rate * dt).exp();
    for i in 0..ACTUATORS {
        let drive = efforts[extensor(i)] - efforts[flexor(i)];
        let terminal = drive / cfg.damping;
        let v0 = ps.zdot[i];
        let mut v = terminal + (v0 - terminal) * decay;
        let mut dz = terminal * dt + (v0 - terminal) * (1.0 - decay) / rate;
        if v.abs() > cfg.slew_max {
            v = v.signum() * cfg.slew_max;
            dz = dz.clamp(-cfg.slew_max * dt, cfg.slew_max * dt);
        }
        let mut z = ps.z[i] + dz;
        if z <= 0.0 {
            z = 0.0;
            v = v.max(0.0);
        } else if z >= 1.0 {
            z = 1.0;
            v = v.min(0.0);
        }
        out.z[i] = z;
        out.zdot[i] = v;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopMode {
    Open,
    Closed,
}

/// Settings of a gait run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitConfig {
    /// Fixed neural and plant step (ms).
    pub dt: f64,
    pub k_p: f64,
    pub plant: PlantConfig,
    /// Time of the set pulse into module A of the first ring (ms).
    pub start_at: f64,
    /// Set pulse amplitude (pA); `None` calibrates to twice `E1`'s
    /// threshold.
    pub set_amplitude: Option<f64>,
    /// Trace sampling interval (ms).
    pub sample_every: f64,
    /// Initial actuator positions: the pose at the end of phase D.
    pub initial_z: [f64; ACTUATORS],
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            k_p: DEFAULT_KP,
            plant: PlantConfig::default(),
            start_at: 10.0,
            set_amplitude: None,
            sample_every: 1.0,
            initial_z: [0.0, 0.0, 1.0, 1.0],
        }
    }
}

/// A rectangular current pulse into the trigger neuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stimulus {
    pub at: f64,
    pub duration: f64,
    pub amplitude: f64,
}

impl Stimulus {
    /// The default stimulus at time `at`: long enough for a short burst
    /// of trigger spikes, since a single spike through `G_ffw` does not
    /// ignite the reverse ring.
    pub fn at(at: f64) -> Self {
        Self {
            at,
            ..Self::default()
        }
    }
}

impl Default for Stimulus {
    fn default() -> Self {
        Self {
            at: 0.0,
            duration: 50.0,
            amplitude: 300.0,
        }
    }
}

/// Sampled neural and plant trace of a gait run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaitTrace {
    pub times: Vec<f64>,
    /// Membrane voltages, one row of `neurons` entries per sample.
    pub voltages: Vec<Vec<f64>>,
    pub efforts: Vec<[f64; MUSCLES]>,
    pub z: Vec<[f64; ACTUATORS]>,
    /// Feedback current onto each module of the first ring (pA).
    pub feedback: Vec<[f64; MODULES]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaitRun {
    pub trace: GaitTrace,
    pub spikes: SpikeRecord,
    pub duration: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GaitError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Latch(#[from] LatchError),
    #[error("invalid gait setting: {0}")]
    InvalidConfig(&'static str),
}

/// Simulates the CPG for `duration` ms from rest: set pulse into module A
/// of the first ring at `cfg.start_at`, optional trigger stimuli, neural
/// and plant steps alternating with zero-order hold both ways. In closed
/// mode each module's excitatory cells receive the feedback current of the
/// actuator their predecessor extends.
pub fn run_gait(
    cpg: &RingCpg,
    mode: LoopMode,
    duration: f64,
    cfg: &GaitConfig,
    stimuli: &[Stimulus],
) -> Result<GaitRun, GaitError> {
    if !(cfg.dt > 0.0) || !(cfg.sample_every > 0.0) || !(duration >= 0.0) {
        return Err(GaitError::InvalidConfig(
            "dt, sample_every must be positive and duration non-negative",
        ));
    }
    let mut net = cpg.network.clone();
    net.reset_to_rest();
    let entry = cpg.rings[0].modules[0];
    let set_amp = match cfg.set_amplitude {
        Some(a) => a,
        None => default_pulse_amplitudes(&net, &entry)?.0,
    };
    stimulate(
        &mut net,
        entry.set_target(),
        set_amp,
        cfg.start_at,
        PULSE_MS,
    );
    if let Some(trig) = cpg.trigger {
        for s in stimuli {
            stimulate(&mut net, trig, s.amplitude, s.at, s.duration);
        }
    }
    let mut muscles = cpg.muscles.clone();
    let mut plant = PlantState::at_rest(cfg.initial_z);
    let mut stepper = FixedStepper::new();
    let mut fired = Vec::new();
    let mut spikes = SpikeRecord::new();
    let mut trace = GaitTrace::default();
    let n = net.len();
    let mut x = vec![0.0; n];
    let mut efforts = [0.0; MUSCLES];
    let mut feedback = [0.0; MODULES];
    let steps = (duration / cfg.dt).round() as usize;
    let stride = ((cfg.sample_every / cfg.dt).round() as usize).max(1);

    let record = |trace: &mut GaitTrace,
                  t: f64,
                  net: &Network,
                  e: &[f64; MUSCLES],
                  p: &PlantState,
                  f: &[f64; MODULES]| {
        trace.times.push(t);
        trace
            .voltages
            .push(net.states().iter().map(|s| s.v).collect());
        trace.efforts.push(*e);
        trace.z.push(p.z);
        trace.feedback.push(*f);
    };

    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        if mode == LoopMode::Closed {
            for (r, ring) in cpg.rings.iter().enumerate() {
                for m in 0..MODULES {
                    let a = ring.awaited_actuator(m);
                    let i = proprioceptive_current(plant.z[a], plant.z[opposite(a)], cfg.k_p);
                    let t_m = ring.modules[m];
                    net.input_mut(t_m.e1).bias = i;
                    net.input_mut(t_m.e2).bias = i;
                    if r == 0 {
                        feedback[m] = i;
                    }
                }
            }
        }
        if k % stride == 0 {
            record(&mut trace, t, &net, &efforts, &plant, &feedback);
        }
        fired.clear();
        stepper.step(&mut net, t, cfg.dt, &mut fired)?;
        for &i in &fired {
            spikes.push(t + cfg.dt, i);
        }
        for (j, s) in net.states().iter().enumerate() {
            x[j] = s.x;
        }
        for (e, m) in efforts.iter_mut().zip(muscles.iter_mut()) {
            *e = m.step(&x, cfg.dt);
        }
        plant = plant_step(&plant, &cfg.plant, &efforts, cfg.dt);
    }
    if steps > 0 && steps.is_multiple_of(stride) {
        record(
            &mut trace,
            steps as f64 * cfg.dt,
            &net,
            &efforts,
            &plant,
            &feedback,
        );
    }
    Ok(GaitRun {
        trace,
        spikes,
        duration,
    })
}

/// A contiguous stretch of activity of one module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub ring: usize,
    pub module: usize,
    pub start: f64,
    pub end: f64,
    pub spikes: usize,
}

impl Burst {
    pub fn dwell(&self) -> f64 {
        self.end - self.start
    }
}

/// Gap between excitatory spikes that ends a burst (ms).
pub const BURST_GAP_MS: f64 = 100.0;
/// Fewest excitatory spikes a burst must contain; stray spikes from
/// feed-forward input do not count as activation.
pub const BURST_MIN_SPIKES: usize = 4;

/// Bursts of every module, ordered by onset.
pub fn bursts(cpg: &RingCpg, spikes: &SpikeRecord) -> Vec<Burst> {
    let mut out = Vec::new();
    for (r, ring) in cpg.rings.iter().enumerate() {
        for (m, t) in ring.modules.iter().enumerate() {
            let mut times: Vec<f64> = spikes.times(t.e1).chain(spikes.times(t.e2)).collect();
            times.sort_by(f64::total_cmp);
            let mut start = 0;
            for k in 1..=times.len() {
                if k == times.len() || times[k] - times[k - 1] > BURST_GAP_MS {
                    if k - start >= BURST_MIN_SPIKES {
                        out.push(Burst {
                            ring: r,
                            module: m,
                            start: times[start],
                            end: times[k - 1],
                            spikes: k - start,
                        });
                    }
                    start = k;
                }
            }
        }
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    out
}

/// Activation word of one ring, e.g. `"ABCDABCD"`.
pub fn activation_word(bursts: &[Burst], ring: usize) -> String {
    bursts
        .iter()
        .filter(|b| b.ring == ring)
        .map(|b| module_name(b.module))
        .collect()
}

/// Whether `word` is a prefix of `ABCDABCD…` starting at `A`.
pub fn is_cyclic_abcd(word: &str) -> bool {
    word.chars()
        .enumerate()
        .all(|(i, c)| c == module_name(i % MODULES))
}

/// Per-run statistics for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSummary {
    pub word: String,
    /// Complete cycles (onsets of module A after the first).
    pub cycles: usize,
    /// Mean time between onsets of module A (ms).
    pub cycle_period: Option<f64>,
    /// Mean burst duration per module (ms).
    pub dwell: [Option<f64>; MODULES],
    /// Mean over whole cycles of each actuator's peak-to-peak excursion.
    pub excursion: [Option<f64>; ACTUATORS],
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Summary of the first ring's activity.
pub fn summarize(cpg: &RingCpg, run: &GaitRun) -> GaitSummary {
    summarize_ring(cpg, run, 0, 0.0, run.duration)
}

/// Summary of ring `ring` restricted to bursts starting in `[from, to)`.
pub fn summarize_ring(
    cpg: &RingCpg,
    run: &GaitRun,
    ring: usize,
    from: f64,
    to: f64,
) -> GaitSummary {
    let all = bursts(cpg, &run.spikes);
    let bs: Vec<Burst> = all
        .into_iter()
        .filter(|b| b.ring == ring && b.start >= from && b.start < to)
        .collect();
    let word = activation_word(&bs, ring);
    let onsets: Vec<f64> = bs
        .iter()
        .filter(|b| b.module == 0)
        .map(|b| b.start)
        .collect();
    let periods: Vec<f64> = onsets.windows(2).map(|w| w[1] - w[0]).collect();
    let dwell = std::array::from_fn(|m| {
        let d: Vec<f64> = bs
            .iter()
            .filter(|b| b.module == m)
            .map(Burst::dwell)
            .collect();
        mean(&d)
    });
    let excursion = std::array::from_fn(|a| {
        let per_cycle: Vec<f64> = onsets
            .windows(2)
            .map(|w| {
                let (lo, hi) = run
                    .trace
                    .times
                    .iter()
                    .zip(&run.trace.z)
                    .filter(|(t, _)| **t >= w[0] && **t < w[1])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, z)| {
                        (lo.min(z[a]), hi.max(z[a]))
                    });
                hi - lo
            })
            .collect();
        mean(&per_cycle)
    });
    GaitSummary {
        word,
        cycles: periods.len(),
        cycle_period: mean(&periods),
        dwell,
        excursion,
    }
}

/// Hand-over from the forward to the reverse ring around one trigger
/// stimulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalSummary {
    pub stimulus_at: f64,
    /// Forward activity before the stimulus.
    pub forward: GaitSummary,
    /// Reverse activity from the stimulus on.
    pub reverse: GaitSummary,
    /// End of the last forward burst (ms).
    pub forward_last_end: Option<f64>,
    /// Forward bursts starting after the stimulus.
    pub forward_bursts_after: usize,
    /// Onset of the first reverse burst at or after the stimulus (ms).
    pub reverse_first_start: Option<f64>,
    /// Mean forward dwell before the stimulus: the state period (ms).
    pub state_period: Option<f64>,
    /// The forward ring fell silent and the reverse ring started, both
    /// within one state period of the stimulus.
    pub switched: bool,
}

/// Reversal statistics for a run of [`build_reversal`]'s circuit.
pub fn summarize_reversal(cpg: &RingCpg, run: &GaitRun, stimulus_at: f64) -> ReversalSummary {
    let all = bursts(cpg, &run.spikes);
    let forward = summarize_ring(cpg, run, 0, 0.0, stimulus_at);
    let reverse = summarize_ring(cpg, run, 1, stimulus_at, f64::INFINITY);
    let forward_last_end = all
        .iter()
        .filter(|b| b.ring == 0)
        .map(|b| b.end)
        .reduce(f64::max);
    let forward_bursts_after = all
        .iter()
        .filter(|b| b.ring == 0 && b.start > stimulus_at)
        .count();
    let reverse_first_start = all
        .iter()
        .find(|b| b.ring == 1 && b.start >= stimulus_at)
        .map(|b| b.start);
    let dwells: Vec<f64> = forward.dwell.iter().flatten().copied().collect();
    let state_period = mean(&dwells);
    let switched = match (state_period, forward_last_end, reverse_first_start) {
        (Some(p), Some(end), Some(start)) => {
            forward_bursts_after == 0 && end - stimulus_at <= p && start - stimulus_at <= p
        }
        _ => false,
    };
    ReversalSummary {
        stimulus_at,
        forward,
        reverse,
        forward_last_end,
        forward_bursts_after,
        reverse_first_start,
        state_period,
        switched,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feedback_extremes() {
        assert_eq!(proprioceptive_current(1.0, 0.0, 25.0), 0.0);
        assert_eq!(proprioceptive_current(0.0, 1.0, 25.0), -50.0);
        assert_eq!(proprioceptive_current(0.5, 0.5, 25.0), -25.0);
    }

    #[test]
    fn phase_maps() {
        assert_eq!(opposite(0), 2);
        assert_eq!(opposite(3), 1);
        for m in 0..MODULES {
            assert_eq!(REVERSE_PHASES[m], (4 - m) % 4);
        }
    }

    #[test]
    fn ring_counts() {
        let ring = build_ring(
            &NeuronParams::RS,
            &NeuronParams::LTS,
            &SynapticParams::NOMINAL,
            &MuscleConfig::default(),
        );
        assert_eq!(ring.neuron_count(), 12);
        assert_eq!(ring.muscles.len(), 8);
        assert_eq!(ring.inter_module_synapses(), 8);
        let rev = build_reversal(
            &NeuronParams::RS,
            &NeuronParams::LTS,
            &SynapticParams::NOMINAL,
            &MuscleConfig::default(),
        );
        assert_eq!(rev.neuron_count(), 25);
    }

    #[test]
    fn plant_at_rest_stays() {
        let ps = PlantState::at_rest([0.2, 0.4, 0.6, 0.8]);
        let next = plant_step(&ps, &PlantConfig::default(), &[0.0; MUSCLES], 0.1);
        assert_eq!(next, ps);
    }

    #[test]
    fn cyclic_word() {
        assert!(is_cyclic_abcd("ABCDABCDA"));
        assert!(!is_cyclic_abcd("ABDC"));
        assert!(!is_cyclic_abcd("BCDA"));
    }
}
