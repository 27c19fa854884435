//! Run configuration. Every field is optional; an empty file gives the
//! nominal system.

use crate::CliError;
use serde::{Deserialize, Serialize};
use spikelatch::cpg::{GaitConfig, PlantConfig, Stimulus, ACTUATORS, DEFAULT_KP};
use spikelatch::latch::SynapticParams;
use spikelatch::montecarlo::Variant;
use spikelatch::neuron::NeuronParam;
use spikelatch::poincare::PoincareConfig;
use spikelatch::{MuscleConfig, NeuronParams, SimConfig};
use std::path::{Path, PathBuf};

/// Per-cell constants replacing the preset's values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl NeuronOverrides {
    pub fn get(&self, p: NeuronParam) -> Option<f64> {
        match p {
            NeuronParam::A => self.a,
            NeuronParam::B => self.b,
            NeuronParam::C => self.c,
            NeuronParam::D => self.d,
            NeuronParam::Cap => self.cap,
            NeuronParam::K => self.k,
            NeuronParam::VRest => self.v_r,
            NeuronParam::VThresh => self.v_t,
            NeuronParam::VRev => self.v_n,
            NeuronParam::VPeak => self.v_p,
            NeuronParam::Tau => self.tau,
        }
    }

    pub fn apply(&self, base: &NeuronParams) -> NeuronParams {
        let mut p = *base;
        for param in NeuronParam::ALL {
            if let Some(v) = self.get(param) {
                p.set(param, v);
            }
        }
        p
    }
}

/// Viability oracle settings; integration settings come from `[engine]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViabilitySettings {
    pub return_horizon: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub scales: [f64; 4],
    pub min_period: f64,
    pub reset_search_max: f64,
    pub reset_search_tol: f64,
    pub reset_overdrive: f64,
    /// Relative resolution of parameter-range boundaries.
    pub scan_tol: f64,
}

impl Default for ViabilitySettings {
    fn default() -> Self {
        let p = PoincareConfig::default();
        Self {
            return_horizon: p.return_horizon,
            picard_tol: p.picard_tol,
            max_iter: p.max_iter,
            scales: p.scales,
            min_period: p.min_period,
            reset_search_max: p.reset_search_max,
            reset_search_tol: p.reset_search_tol,
            reset_overdrive: p.reset_overdrive,
            scan_tol: 1e-3,
        }
    }
}

/// `simulate-latch` stimulus protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatchSettings {
    pub set_at: f64,
    pub reset_at: f64,
    pub duration: f64,
    /// Pulse amplitudes (pA); calibrated to twice threshold when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset_amplitude: Option<f64>,
    pub sample_every: f64,
}

impl Default for LatchSettings {
    fn default() -> Self {
        Self {
            set_at: 100.0,
            reset_at: 600.0,
            duration: 1000.0,
            set_amplitude: None,
            reset_amplitude: None,
            sample_every: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitSettings {
    pub k_p: f64,
    pub start_at: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_amplitude: Option<f64>,
    pub sample_every: f64,
    pub initial_z: [f64; ACTUATORS],
    pub duration: f64,
}

impl Default for GaitSettings {
    fn default() -> Self {
        let g = GaitConfig::default();
        Self {
            k_p: DEFAULT_KP,
            start_at: g.start_at,
            set_amplitude: g.set_amplitude,
            sample_every: g.sample_every,
            initial_z: g.initial_z,
            duration: 30_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReversalSettings {
    pub stimulus: Stimulus,
    /// Simulated time after the stimulus (ms).
    pub after: f64,
}

impl Default for ReversalSettings {
    fn default() -> Self {
        Self {
            stimulus: Stimulus::at(30_000.0),
            after: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSettings {
    pub variant: Variant,
    pub trials: u64,
    pub fraction: f64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            variant: Variant::BothIdentical,
            trials: 100_000,
            fraction: 0.10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Overrides of the regular-spiking preset used for both excitatory cells.
    pub excitatory: NeuronOverrides,
    /// Overrides of the low-threshold-spiking preset of the interneuron.
    pub inhibitory: NeuronOverrides,
    pub synapses: SynapticParams,
    pub engine: SimConfig,
    pub viability: ViabilitySettings,
    pub latch: LatchSettings,
    pub muscle: MuscleConfig,
    pub plant: PlantConfig,
    pub gait: GaitSettings,
    pub reversal: ReversalSettings,
    pub montecarlo: MonteCarloSettings,
}

fn invalid(field: &str, why: &str) -> CliError {
    CliError::Config(format!("{field}: {why}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be positive and finite"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be non-negative and finite"))
    }
}

fn check_cell(section: &str, p: &NeuronParams) -> Result<(), CliError> {
    for param in NeuronParam::ALL {
        if !p.get(param).is_finite() {
            return Err(invalid(
                &format!("{section}.{}", param.symbol()),
                "must be finite",
            ));
        }
    }
    positive(&format!("{section}.C"), p.cap)?;
    positive(&format!("{section}.tau"), p.tau)?;
    non_negative(&format!("{section}.k"), p.k)?;
    non_negative(&format!("{section}.a"), p.a)
}

impl RunConfig {
    /// Parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn excitatory(&self) -> NeuronParams {
        self.excitatory.apply(&NeuronParams::RS)
    }

    pub fn inhibitory(&self) -> NeuronParams {
        self.inhibitory.apply(&NeuronParams::LTS)
    }

    pub fn poincare(&self) -> PoincareConfig {
        let v = &self.viability;
        PoincareConfig {
            sim: self.engine,
            return_horizon: v.return_horizon,
            picard_tol: v.picard_tol,
            max_iter: v.max_iter,
            scales: v.scales,
            min_period: v.min_period,
            reset_search_max: v.reset_search_max,
            reset_search_tol: v.reset_search_tol,
            reset_overdrive: v.reset_overdrive,
        }
    }

    pub fn gait_config(&self) -> GaitConfig {
        let g = &self.gait;
        GaitConfig {
            dt: self.engine.dt,
            k_p: g.k_p,
            plant: self.plant,
            start_at: g.start_at,
            set_amplitude: g.set_amplitude,
            sample_every: g.sample_every,
            initial_z: g.initial_z,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_cell("excitatory", &self.excitatory())?;
        check_cell("inhibitory", &self.inhibitory())?;
        let s = &self.synapses;
        for (name, g) in [
            ("g_exc", s.g_exc),
            ("g_inh", s.g_inh),
            ("g_rst", s.g_rst),
            ("g_ffw", s.g_ffw),
            ("g_fb", s.g_fb),
        ] {
            non_negative(&format!("synapses.{name}"), g)?;
        }
        self.engine
            .validate()
            .map_err(|e| invalid("engine", &e.to_string()))?;

        let v = &self.viability;
        positive("viability.return_horizon", v.return_horizon)?;
        positive("viability.picard_tol", v.picard_tol)?;
        if v.max_iter == 0 {
            return Err(invalid("viability.max_iter", "must be at least 1"));
        }
        for s in v.scales {
            positive("viability.scales", s)?;
        }
        non_negative("viability.min_period", v.min_period)?;
        positive("viability.reset_search_max", v.reset_search_max)?;
        positive("viability.reset_search_tol", v.reset_search_tol)?;
        positive("viability.reset_overdrive", v.reset_overdrive)?;
        positive("viability.scan_tol", v.scan_tol)?;

        let l = &self.latch;
        non_negative("latch.duration", l.duration)?;
        positive("latch.sample_every", l.sample_every)?;
        if let Some(a) = l.set_amplitude {
            non_negative("latch.set_amplitude", a)?;
        }
        if let Some(a) = l.reset_amplitude {
            non_negative("latch.reset_amplitude", a)?;
        }

        positive("muscle.tau_m", self.muscle.tau_m)?;
        non_negative("muscle.conductance", self.muscle.conductance)?;
        positive("plant.mass", self.plant.mass)?;
        positive("plant.damping", self.plant.damping)?;
        positive("plant.slew_max", self.plant.slew_max)?;

        let g = &self.gait;
        non_negative("gait.k_p", g.k_p)?;
        positive("gait.sample_every", g.sample_every)?;
        non_negative("gait.duration", g.duration)?;
        if g.initial_z.iter().any(|z| !(0.0..=1.0).contains(z)) {
            return Err(invalid("gait.initial_z", "positions must lie in [0, 1]"));
        }
        positive(
            "reversal.stimulus.duration",
            self.reversal.stimulus.duration,
        )?;
        non_negative("reversal.after", self.reversal.after)?;

        let m = &self.montecarlo;
        if m.trials == 0 {
            return Err(invalid("montecarlo.trials", "must be at least 1"));
        }
        non_negative("montecarlo.fraction", m.fraction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_nominal() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.excitatory(), NeuronParams::RS);
        assert_eq!(cfg.inhibitory(), NeuronParams::LTS);
        assert_eq!(cfg.poincare(), PoincareConfig::default());
    }

    #[test]
    fn overrides_apply_to_preset() {
        let cfg = RunConfig::parse("[excitatory]\nC = 120.0\nv_t = -45\n").unwrap();
        let p = cfg.excitatory();
        assert_eq!(p.cap, 120.0);
        assert_eq!(p.v_t, -45.0);
        assert_eq!(p.a, NeuronParams::RS.a);
    }

    #[test]
    fn unknown_field_is_reported_with_line() {
        let err = RunConfig::parse("seed = 1\n\n[synapses]\ng_bogus = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4"), "{msg}");
        assert!(msg.contains("g_bogus"), "{msg}");
    }

    #[test]
    fn invalid_value_names_field() {
        let err = RunConfig::parse("[plant]\nmass = -1\n").unwrap_err();
        assert!(err.to_string().contains("plant.mass"));
    }
}
