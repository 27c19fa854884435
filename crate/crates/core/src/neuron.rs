//! Single-cell dynamics: the quadratic integrate-and-fire (Izhikevich) neuron
//! augmented with a second-order synaptic activation whose impulse response is
//! the alpha function.
//!
//! Units throughout are mV, ms, pA, nS and pF. The system is closed under
//! these units, so no conversion factors appear in [`derivatives`].

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Per-cell constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronParams {
    /// Characteristic rate of the recovery variable (1/ms).
    pub a: f64,
    /// Leakage conductance of the recovery variable (nS).
    pub b: f64,
    /// Downstroke return voltage (mV).
    pub c: f64,
    /// Downstroke inrush current (pA).
    pub d: f64,
    /// Membrane capacitance (pF).
    #[serde(rename = "C")]
    pub cap: f64,
    /// Sodium channel gain (nS/mV).
    pub k: f64,
    /// Resting potential (mV).
    pub v_r: f64,
    /// Threshold voltage (mV).
    pub v_t: f64,
    /// Synaptic reversal potential of this cell's outgoing synapses (mV).
    pub v_n: f64,
    /// Action potential peak (mV).
    pub v_p: f64,
    /// Synaptic time constant of this cell's outgoing synapses (ms).
    pub tau: f64,
}

impl NeuronParams {
    /// Regular-spiking pyramidal cell.
    pub const RS: NeuronParams = NeuronParams {
        a: 0.03,
        b: -2.0,
        c: -50.0,
        d: 100.0,
        cap: 100.0,
        k: 0.7,
        v_r: -60.0,
        v_t: -40.0,
        v_n: 0.0,
        v_p: 35.0,
        tau: 5.0,
    };

    /// Low-threshold-spiking inhibitory interneuron.
    pub const LTS: NeuronParams = NeuronParams {
        a: 0.03,
        b: 8.0,
        c: -53.0,
        d: 20.0,
        cap: 100.0,
        k: 1.0,
        v_r: -56.0,
        v_t: -42.0,
        v_n: -70.0,
        v_p: 20.0,
        tau: 20.0,
    };

    pub fn get(&self, param: NeuronParam) -> f64 {
        match param {
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

    pub fn set(&mut self, param: NeuronParam, value: f64) {
        let slot = match param {
            NeuronParam::A => &mut self.a,
            NeuronParam::B => &mut self.b,
            NeuronParam::C => &mut self.c,
            NeuronParam::D => &mut self.d,
            NeuronParam::Cap => &mut self.cap,
            NeuronParam::K => &mut self.k,
            NeuronParam::VRest => &mut self.v_r,
            NeuronParam::VThresh => &mut self.v_t,
            NeuronParam::VRev => &mut self.v_n,
            NeuronParam::VPeak => &mut self.v_p,
            NeuronParam::Tau => &mut self.tau,
        };
        *slot = value;
    }

    /// Copy of `self` with one field replaced.
    pub fn with(mut self, param: NeuronParam, value: f64) -> Self {
        self.set(param, value);
        self
    }

    /// Parameters as an array in [`NeuronParam::ALL`] order.
    pub fn to_array(&self) -> [f64; NeuronParam::COUNT] {
        NeuronParam::ALL.map(|p| self.get(p))
    }

    /// The state a disconnected cell relaxes to: `v = V_r` with everything
    /// else zero.
    pub fn rest_state(&self) -> NeuronState {
        NeuronState {
            v: self.v_r,
            u: 0.0,
            x: 0.0,
            y: 0.0,
        }
    }
}

/// Names of the eleven per-cell constants, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeuronParam {
    A,
    B,
    C,
    D,
    Cap,
    K,
    VRest,
    VThresh,
    VRev,
    VPeak,
    Tau,
}

impl NeuronParam {
    pub const COUNT: usize = 11;

    pub const ALL: [NeuronParam; Self::COUNT] = [
        NeuronParam::A,
        NeuronParam::B,
        NeuronParam::C,
        NeuronParam::D,
        NeuronParam::Cap,
        NeuronParam::K,
        NeuronParam::VRest,
        NeuronParam::VThresh,
        NeuronParam::VRev,
        NeuronParam::VPeak,
        NeuronParam::Tau,
    ];

    /// Short symbolic name used in reports and CSV headers.
    pub fn symbol(self) -> &'static str {
        match self {
            NeuronParam::A => "a",
            NeuronParam::B => "b",
            NeuronParam::C => "c",
            NeuronParam::D => "d",
            NeuronParam::Cap => "C",
            NeuronParam::K => "k",
            NeuronParam::VRest => "V_r",
            NeuronParam::VThresh => "V_t",
            NeuronParam::VRev => "V_n",
            NeuronParam::VPeak => "V_p",
            NeuronParam::Tau => "tau",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            NeuronParam::A => "1/ms",
            NeuronParam::B => "nS",
            NeuronParam::C | NeuronParam::VRest | NeuronParam::VThresh => "mV",
            NeuronParam::VRev | NeuronParam::VPeak => "mV",
            NeuronParam::D => "pA",
            NeuronParam::Cap => "pF",
            NeuronParam::K => "nS/mV",
            NeuronParam::Tau => "ms",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NeuronParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for NeuronParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NeuronParam::ALL
            .into_iter()
            .find(|p| p.symbol() == s)
            .or_else(|| match s.to_ascii_lowercase().as_str() {
                "cap" => Some(NeuronParam::Cap),
                "v_r" | "vr" => Some(NeuronParam::VRest),
                "v_t" | "vt" => Some(NeuronParam::VThresh),
                "v_n" | "vn" => Some(NeuronParam::VRev),
                "v_p" | "vp" => Some(NeuronParam::VPeak),
                _ => None,
            })
            .ok_or_else(|| format!("unknown neuron parameter `{s}`"))
    }
}

/// Phase variables of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NeuronState {
    /// Membrane voltage (mV).
    pub v: f64,
    /// Recovery current (pA).
    pub u: f64,
    /// Synaptic activation.
    pub x: f64,
    /// Auxiliary synaptic variable, `tau * dx/dt`.
    pub y: f64,
}

impl NeuronState {
    pub const DIM: usize = 4;

    pub fn new(v: f64, u: f64, x: f64, y: f64) -> Self {
        Self { v, u, x, y }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.v, self.u, self.x, self.y]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            v: s[0],
            u: s[1],
            x: s[2],
            y: s[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.u.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

/// Time derivative of `s` under input current `input` (pA).
///
/// The synaptic pair obeys `tau^2 x'' + 2 tau x' + x = 0`, split as
/// `x' = y / tau`, `y' = -(2y + x) / tau`.
#[inline]
pub fn derivatives(p: &NeuronParams, s: &NeuronState, input: f64) -> NeuronState {
    NeuronState {
        v: (p.k * (s.v - p.v_r) * (s.v - p.v_t) - s.u + input) / p.cap,
        u: p.a * (p.b * (s.v - p.v_r) - s.u),
        x: s.y / p.tau,
        y: -(2.0 * s.y + s.x) / p.tau,
    }
}

/// Discrete map applied when `v` reaches the peak: `v <- c`, `u <- u + d`,
/// `y <- y + 1`. The activation `x` is continuous across the event.
#[inline]
pub fn spike_reset(p: &NeuronParams, s: &NeuronState) -> NeuronState {
    NeuronState {
        v: p.c,
        u: s.u + p.d,
        x: s.x,
        y: s.y + 1.0,
    }
}

/// Closed-form synaptic activation `(t / tau) exp(-t / tau)` following a
/// single spike at `t = 0`.
pub fn alpha_activation(t: f64, tau: f64) -> f64 {
    assert!(t >= 0.0, "alpha_activation requires t >= 0, got {t}");
    (t / tau) * (-t / tau).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_match_table() {
        let rs = NeuronParams::RS.to_array();
        assert_eq!(
            rs,
            [0.03, -2.0, -50.0, 100.0, 100.0, 0.7, -60.0, -40.0, 0.0, 35.0, 5.0]
        );
        let lts = NeuronParams::LTS.to_array();
        assert_eq!(
            lts,
            [0.03, 8.0, -53.0, 20.0, 100.0, 1.0, -56.0, -42.0, -70.0, 20.0, 20.0]
        );
        for p in [NeuronParams::RS, NeuronParams::LTS] {
            assert!(p.cap > 0.0 && p.tau > 0.0 && p.k >= 0.0);
            assert!(p.v_r < p.v_t);
        }
    }

    #[test]
    fn rest_is_fixed_point() {
        let d = derivatives(
            &NeuronParams::RS,
            &NeuronState::new(-60.0, 0.0, 0.0, 0.0),
            0.0,
        );
        assert_eq!(d, NeuronState::default());
    }

    #[test]
    fn threshold_is_voltage_root() {
        let d = derivatives(
            &NeuronParams::RS,
            &NeuronState::new(-40.0, 0.0, 0.0, 0.0),
            0.0,
        );
        assert_eq!(d.v, 0.0);
    }

    #[test]
    fn hand_evaluated_derivative() {
        let s = NeuronState::new(-50.0, 50.0, 0.2, 0.1);
        let d = derivatives(&NeuronParams::RS, &s, 100.0);
        // 0.7 * 10 * -10 = -70; (-70 - 50 + 100) / 100
        assert_relative_eq!(d.v, -0.20, epsilon = 1e-12);
        assert_relative_eq!(d.u, 0.03 * (-2.0 * 10.0 - 50.0), epsilon = 1e-12);
        assert_relative_eq!(d.x, 0.1 / 5.0, epsilon = 1e-12);
        assert_relative_eq!(d.y, -(0.2 + 0.2) / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn reset_examples() {
        let rs = spike_reset(&NeuronParams::RS, &NeuronState::new(35.0, 120.0, 0.4, 0.2));
        assert_eq!(rs.v, -50.0);
        assert_eq!(rs.u, 220.0);
        assert_eq!(rs.x, 0.4);
        assert_relative_eq!(rs.y, 1.2, epsilon = 1e-15);

        let lts = spike_reset(&NeuronParams::LTS, &NeuronState::new(20.0, 0.0, 0.0, 0.0));
        assert_eq!(lts, NeuronState::new(-53.0, 20.0, 0.0, 1.0));

        let twice = spike_reset(&NeuronParams::RS, &spike_reset(&NeuronParams::RS, &lts));
        assert_eq!(twice.u, lts.u + 200.0);
        assert_eq!(twice.y, lts.y + 2.0);
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_activation(0.0, 5.0), 0.0);
        assert_relative_eq!(alpha_activation(5.0, 5.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(alpha_activation(20.0, 20.0), 0.36788, epsilon = 1e-5);
    }

    #[test]
    #[should_panic]
    fn alpha_rejects_negative_time() {
        alpha_activation(-1.0, 5.0);
    }

    #[test]
    fn param_names_round_trip() {
        for p in NeuronParam::ALL {
            assert_eq!(p.symbol().parse::<NeuronParam>().unwrap(), p);
            assert_eq!(NeuronParams::RS.with(p, 1.5).get(p), 1.5);
        }
    }

    proptest::proptest! {
        #[test]
        fn reset_never_touches_activation(v in -80.0..40.0f64, u in -500.0..500.0f64,
                                          x in 0.0..2.0f64, y in -1.0..3.0f64) {
            let s = NeuronState::new(v, u, x, y);
            proptest::prop_assert_eq!(spike_reset(&NeuronParams::RS, &s).x, x);
            proptest::prop_assert_eq!(spike_reset(&NeuronParams::LTS, &s).x, x);
        }
    }
}
