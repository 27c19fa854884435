//! Time integration of the hybrid network dynamics.
//!
//! Two integrators are provided:
//!
//! * [`FixedStepper`]: classical RK4 with a post-step threshold check. A
//!   neuron whose voltage ends a step at or above its peak is clamped to the
//!   peak, reported as fired and reset. External inputs are sampled once at
//!   the start of each step (zero-order hold), the way an embedded controller
//!   reading an ADC would see them.
//! * [`AdaptiveSolver`]: Dormand–Prince 5(4) with error control. Crossings of
//!   `v_i = V_p,i` are located on the step's cubic Hermite interpolant,
//!   refined by Newton polishing on re-integrated substeps, and the reset is
//!   applied exactly at the located time before integration restarts.
//!   Discontinuities of the pulse schedule are treated as breakpoints.

use crate::network::{Network, SpikeRecord};
use crate::neuron::{spike_reset, NeuronState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DIM: usize = NeuronState::DIM;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("integration blew up: neuron {neuron} has a non-finite state at t = {t} ms")]
    Blowup { neuron: usize, t: f64 },
    #[error("step size underflow at t = {t} ms (h = {h:e} ms); system too stiff")]
    StepUnderflow { t: f64, h: f64 },
    #[error("neuron {neuron} resets to or above its peak at t = {t} ms")]
    DegenerateReset { neuron: usize, t: f64 },
    #[error("invalid integration settings: {0}")]
    InvalidConfig(&'static str),
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Fixed step (ms).
    pub dt: f64,
    /// Horizon (ms).
    pub t_end: f64,
    /// Spike-time location tolerance (ms).
    pub event_tol: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step the adaptive solver may take (ms).
    pub max_step: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 1000.0,
            event_tol: 1e-4,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 5.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.dt > 0.0) {
            return Err(EngineError::InvalidConfig("dt must be positive"));
        }
        if !(self.event_tol > 0.0 && self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(EngineError::InvalidConfig("tolerances must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(EngineError::InvalidConfig("max_step must be positive"));
        }
        if !(self.t_end >= 0.0) {
            return Err(EngineError::InvalidConfig("t_end must be non-negative"));
        }
        Ok(())
    }
}

/// Sampled states plus the spikes emitted while producing them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Flat network states, `dim` values per sample.
    pub states: Vec<f64>,
    pub spikes: SpikeRecord,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, y: &[f64]) {
        debug_assert_eq!(y.len(), self.dim);
        self.times.push(t);
        self.states.extend_from_slice(y);
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn neuron(&self, k: usize, i: usize) -> NeuronState {
        NeuronState::from_slice(&self.state(k)[i * DIM..(i + 1) * DIM])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dim.max(1)))
    }
}

/// Whether an integration should keep going after a spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Reusable RK4 stepper.
#[derive(Debug, Clone, Default)]
pub struct FixedStepper {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    y0: Vec<f64>,
    tmp: Vec<f64>,
    ext: Vec<f64>,
}

impl FixedStepper {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, n: usize) {
        if self.ext.len() != n {
            let dim = n * DIM;
            for b in [
                &mut self.k1,
                &mut self.k2,
                &mut self.k3,
                &mut self.k4,
                &mut self.y0,
                &mut self.tmp,
            ] {
                b.resize(dim, 0.0);
            }
            self.ext.resize(n, 0.0);
        }
    }

    /// Advances `net` from `t` to `t + dt`; indices of neurons that fired in
    /// the step are appended to `fired`, and those neurons are reset.
    pub fn step(
        &mut self,
        net: &mut Network,
        t: f64,
        dt: f64,
        fired: &mut Vec<usize>,
    ) -> Result<(), EngineError> {
        if !(dt > 0.0) {
            return Err(EngineError::InvalidConfig("dt must be positive"));
        }
        let n = net.len();
        self.ensure(n);
        net.external_currents(t, &mut self.ext);
        let dim = n * DIM;
        for (i, s) in net.states().iter().enumerate() {
            self.y0[i * DIM..(i + 1) * DIM].copy_from_slice(&s.to_array());
        }
        let (y0, tmp, ext) = (&self.y0, &mut self.tmp, &self.ext);
        net.rhs_with_external(y0, ext, &mut self.k1);
        for j in 0..dim {
            tmp[j] = y0[j] + 0.5 * dt * self.k1[j];
        }
        net.rhs_with_external(tmp, ext, &mut self.k2);
        for j in 0..dim {
            tmp[j] = y0[j] + 0.5 * dt * self.k2[j];
        }
        net.rhs_with_external(tmp, ext, &mut self.k3);
        for j in 0..dim {
            tmp[j] = y0[j] + dt * self.k3[j];
        }
        net.rhs_with_external(tmp, ext, &mut self.k4);
        for j in 0..dim {
            tmp[j] =
                y0[j] + dt / 6.0 * (self.k1[j] + 2.0 * self.k2[j] + 2.0 * self.k3[j] + self.k4[j]);
        }
        for i in 0..n {
            let mut s = NeuronState::from_slice(&tmp[i * DIM..(i + 1) * DIM]);
            let p = *net.params(i);
            // A state that overshot to infinity still crossed the peak.
            if s.v.is_nan() || !s.u.is_finite() || !s.x.is_finite() || !s.y.is_finite() {
                return Err(EngineError::Blowup {
                    neuron: i,
                    t: t + dt,
                });
            }
            if s.v >= p.v_p {
                s.v = p.v_p;
                s = spike_reset(&p, &s);
                if s.v >= p.v_p {
                    return Err(EngineError::DegenerateReset {
                        neuron: i,
                        t: t + dt,
                    });
                }
                fired.push(i);
            }
            net.set_state(i, s);
        }
        Ok(())
    }
}

/// One RK4 step on a fresh stepper; returns the neurons that fired.
pub fn step_fixed(net: &mut Network, t: f64, dt: f64) -> Result<Vec<usize>, EngineError> {
    let mut fired = Vec::new();
    FixedStepper::new().step(net, t, dt, &mut fired)?;
    Ok(fired)
}

/// Runs the fixed-step integrator from `t = 0` to `cfg.t_end`, sampling every
/// `stride` steps (the initial and final states are always sampled).
pub fn simulate_fixed(
    net: &mut Network,
    cfg: &SimConfig,
    stride: usize,
) -> Result<Trajectory, EngineError> {
    cfg.validate()?;
    let stride = stride.max(1);
    let mut traj = Trajectory::new(net.len() * DIM);
    let mut stepper = FixedStepper::new();
    let mut fired = Vec::new();
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    traj.push(0.0, &net.flat_state());
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        fired.clear();
        stepper.step(net, t, cfg.dt, &mut fired)?;
        let t1 = (k + 1) as f64 * cfg.dt;
        for &i in &fired {
            traj.spikes.push(t1, i);
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            traj.push(t1, &net.flat_state());
        }
    }
    Ok(traj)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Outcome of [`AdaptiveSolver::advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advance {
    /// Reached the requested end time.
    Completed,
    /// A spike callback asked to stop; the state is post-reset at this time.
    Stopped(f64),
}

/// Dormand–Prince integrator with spike-event location. Buffers are kept
/// between calls so repeated short integrations do not allocate.
#[derive(Debug, Clone)]
pub struct AdaptiveSolver {
    rel_tol: f64,
    abs_tol: f64,
    event_tol: f64,
    max_step: f64,
    h: f64,
    k: [Vec<f64>; 7],
    y_new: Vec<f64>,
    y_err: Vec<f64>,
    tmp: Vec<f64>,
    ext: Vec<f64>,
    y_evt: Vec<f64>,
    crossed: Vec<usize>,
    steps: u64,
}

impl AdaptiveSolver {
    pub fn new(cfg: &SimConfig) -> Self {
        Self {
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            event_tol: cfg.event_tol,
            max_step: cfg.max_step,
            h: 0.0,
            k: Default::default(),
            y_new: Vec::new(),
            y_err: Vec::new(),
            tmp: Vec::new(),
            ext: Vec::new(),
            y_evt: Vec::new(),
            crossed: Vec::new(),
            steps: 0,
        }
    }

    /// Accepted steps since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn ensure(&mut self, n: usize) {
        let dim = n * DIM;
        if self.y_new.len() != dim {
            for b in self.k.iter_mut() {
                b.resize(dim, 0.0);
            }
            self.y_new.resize(dim, 0.0);
            self.y_err.resize(dim, 0.0);
            self.tmp.resize(dim, 0.0);
            self.y_evt.resize(dim, 0.0);
            self.ext.resize(n, 0.0);
        }
    }

    #[inline]
    fn eval(net: &Network, ext: &mut [f64], t: f64, y: &[f64], dy: &mut [f64]) {
        net.external_currents(t, ext);
        net.rhs_with_external(y, ext, dy);
    }

    /// One trial step of size `h` from `(t, y)`; `k[0]` must hold `f(t, y)`.
    /// Fills `y_new`, `k[6] = f(t + h, y_new)` and returns the scaled error.
    fn trial(&mut self, net: &Network, t: f64, y: &[f64], h: f64, piece_end: f64) -> f64 {
        let dim = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        let ext = &mut self.ext;
        // Stages landing exactly on a pulse edge must see the value inside
        // the current piece, so stage times stop just short of its end.
        let last_t = piece_end.next_down();
        let stage_t = |s: f64| (t + s * h).min(last_t);
        for j in 0..dim {
            tmp[j] = y[j] + h * A21 * k1[j];
        }
        Self::eval(net, ext, stage_t(C2), tmp, k2);
        for j in 0..dim {
            tmp[j] = y[j] + h * (A31 * k1[j] + A32 * k2[j]);
        }
        Self::eval(net, ext, stage_t(C3), tmp, k3);
        for j in 0..dim {
            tmp[j] = y[j] + h * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j]);
        }
        Self::eval(net, ext, stage_t(C4), tmp, k4);
        for j in 0..dim {
            tmp[j] = y[j] + h * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j]);
        }
        Self::eval(net, ext, stage_t(C5), tmp, k5);
        for j in 0..dim {
            tmp[j] =
                y[j] + h * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j] + A64 * k4[j] + A65 * k5[j]);
        }
        Self::eval(net, ext, stage_t(1.0), tmp, k6);
        let y_new = &mut self.y_new;
        for j in 0..dim {
            y_new[j] = y[j] + h * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j] + B5 * k5[j] + B6 * k6[j]);
        }
        Self::eval(net, ext, stage_t(1.0), y_new, k7);
        let mut acc = 0.0;
        for j in 0..dim {
            let e =
                h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
            let sc = self.abs_tol + self.rel_tol * y[j].abs().max(y_new[j].abs());
            acc += (e / sc) * (e / sc);
        }
        let err = (acc / dim as f64).sqrt();
        if err.is_finite() {
            err
        } else {
            f64::INFINITY
        }
    }

    /// Integrates `y` from `*t` to `t_end`. Every spike invokes
    /// `on_spike(t, neuron, pre_reset_state)` before the reset is applied;
    /// returning [`Flow::Stop`] ends the integration at the (post-reset)
    /// event. `on_step(t0, y0, f0, t1, y1, f1)` sees every accepted step.
    pub fn advance<S, O>(
        &mut self,
        net: &Network,
        t: &mut f64,
        y: &mut [f64],
        t_end: f64,
        mut on_spike: S,
        mut on_step: O,
    ) -> Result<Advance, EngineError>
    where
        S: FnMut(f64, usize, &[f64]) -> Flow,
        O: FnMut(f64, &[f64], &[f64], f64, &[f64], &[f64]),
    {
        let n = net.len();
        self.ensure(n);
        let dim = n * DIM;
        assert_eq!(y.len(), dim);
        let mut breaks: Vec<f64> = net
            .breakpoints()
            .into_iter()
            .filter(|&b| b > *t && b < t_end)
            .collect();
        breaks.push(t_end);

        for &piece_end in &breaks {
            let mut fsal_valid = false;
            while *t < piece_end {
                let span = piece_end - *t;
                if span <= 1e-12 * (1.0 + t.abs()) {
                    *t = piece_end;
                    break;
                }
                if !fsal_valid {
                    let (k1, ext) = (&mut self.k[0], &mut self.ext);
                    Self::eval(net, ext, (*t).min(piece_end.next_down()), y, k1);
                    fsal_valid = true;
                }
                if self.h <= 0.0 {
                    self.h = self.initial_step(y);
                }
                let mut h = self.h.min(self.max_step);
                let last = h >= span;
                if last {
                    h = span;
                }
                let err = self.trial(net, *t, y, h, piece_end);
                if err > 1.0 {
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).max(0.2)
                    } else {
                        0.2
                    };
                    self.h = h * fac;
                    if self.h < 1e-12 * (1.0 + t.abs()) {
                        return Err(EngineError::StepUnderflow { t: *t, h: self.h });
                    }
                    continue;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.steps += 1;
                let t1 = if last { piece_end } else { *t + h };

                // Which neurons crossed their peak during the step?
                self.crossed.clear();
                for i in 0..n {
                    let vp = net.params(i).v_p;
                    if self.y_new[i * DIM] >= vp {
                        self.crossed.push(i);
                    }
                }
                if self.crossed.is_empty() {
                    if let Some(i) = first_non_finite(&self.y_new) {
                        return Err(EngineError::Blowup { neuron: i, t: t1 });
                    }
                    on_step(*t, y, &self.k[0], t1, &self.y_new, &self.k[6]);
                    y.copy_from_slice(&self.y_new);
                    self.k.swap(0, 6);
                    *t = t1;
                    continue;
                }

                let t_evt = self.locate_event(net, *t, y, t1, piece_end)?;
                // y_evt/k[6] now hold the state at t_evt; k[0] is still f(t, y).
                on_step(*t, y, &self.k[0], t_evt, &self.y_evt, &self.k[6]);
                y.copy_from_slice(&self.y_evt);
                *t = t_evt;
                let mut stop = false;
                for i in 0..n {
                    let p = *net.params(i);
                    let base = i * DIM;
                    // Exact crossing for the earliest neuron; anything else
                    // within tolerance of its peak fires together.
                    if y[base] >= p.v_p - 1e-6 * (1.0 + p.v_p.abs()) {
                        y[base] = p.v_p;
                        if on_spike(t_evt, i, y) == Flow::Stop {
                            stop = true;
                        }
                        let s = spike_reset(&p, &NeuronState::from_slice(&y[base..base + DIM]));
                        if s.v >= p.v_p {
                            return Err(EngineError::DegenerateReset {
                                neuron: i,
                                t: t_evt,
                            });
                        }
                        y[base..base + DIM].copy_from_slice(&s.to_array());
                    }
                }
                fsal_valid = false;
                if stop {
                    return Ok(Advance::Stopped(t_evt));
                }
            }
        }
        *t = t_end;
        Ok(Advance::Completed)
    }

    fn initial_step(&self, y: &[f64]) -> f64 {
        let f = &self.k[0];
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for j in 0..y.len() {
            let sc = self.abs_tol + self.rel_tol * y[j].abs();
            d0 += (y[j] / sc).powi(2);
            d1 += (f[j] / sc).powi(2);
        }
        let h = if d0 < 1e-10 || d1 < 1e-10 {
            1e-3
        } else {
            0.01 * (d0 / d1).sqrt()
        };
        h.clamp(1e-6, self.max_step)
    }

    /// Finds the earliest peak crossing within the accepted step
    /// `(t0, y) -> (t1, y_new)` and leaves the state at that time in `y_evt`
    /// (with its derivative in `k[6]`).
    fn locate_event(
        &mut self,
        net: &Network,
        t0: f64,
        y: &[f64],
        t1: f64,
        piece_end: f64,
    ) -> Result<f64, EngineError> {
        let h = t1 - t0;
        let mut best = t1;
        for idx in 0..self.crossed.len() {
            let i = self.crossed[idx];
            let vp = net.params(i).v_p;
            let b = i * DIM;
            let (v0, f0, v1, f1) = (y[b], self.k[0][b], self.y_new[b], self.k[6][b]);
            let g = |s: f64| hermite(v0, f0, v1, f1, h, s) - vp;
            // Illinois-modified regula falsi on the normalized step.
            let (mut a, mut ga) = (0.0, v0 - vp);
            let (mut c, mut gc) = (1.0, v1 - vp);
            let mut side = 0i32;
            let tol = 0.1 * self.event_tol / h;
            let mut s = 1.0;
            for _ in 0..100 {
                s = if gc != ga {
                    (a * gc - c * ga) / (gc - ga)
                } else {
                    0.5 * (a + c)
                };
                if !(s > a && s < c) {
                    s = 0.5 * (a + c);
                }
                let gs = g(s);
                if gs >= 0.0 {
                    c = s;
                    gc = gs;
                    if side == 1 {
                        ga *= 0.5;
                    }
                    side = 1;
                } else {
                    a = s;
                    ga = gs;
                    if side == -1 {
                        gc *= 0.5;
                    }
                    side = -1;
                }
                if c - a < tol || gs == 0.0 {
                    break;
                }
            }
            let te = t0 + s * h;
            if te < best {
                best = te;
            }
        }

        // Re-integrate to the estimate and polish with Newton on v of the
        // earliest neuron. The substep is shorter than an accepted step, so
        // its error is within tolerance.
        let lead = self
            .crossed
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let ta = self.crossing_guess(net, a, y, t0, t1);
                let tb = self.crossing_guess(net, b, y, t0, t1);
                ta.total_cmp(&tb)
            })
            .expect("at least one crossing");
        let vp = net.params(lead).v_p;
        let mut te = best;
        for _ in 0..4 {
            let hs = (te - t0).max(1e-12);
            self.trial(net, t0, y, hs, piece_end);
            let v = self.y_new[lead * DIM];
            let dv = self.k[6][lead * DIM];
            let dt = if dv > 0.0 { (vp - v) / dv } else { 0.0 };
            if !dt.is_finite() {
                break;
            }
            if dt.abs() < 0.1 * self.event_tol {
                break;
            }
            te = (te + dt).clamp(t0 + 1e-12, t1);
        }
        if let Some(i) = first_non_finite(&self.y_new) {
            return Err(EngineError::Blowup { neuron: i, t: te });
        }
        self.y_evt.copy_from_slice(&self.y_new);
        Ok(te)
    }

    fn crossing_guess(&self, net: &Network, i: usize, y: &[f64], t0: f64, t1: f64) -> f64 {
        let vp = net.params(i).v_p;
        let v0 = y[i * DIM];
        let v1 = self.y_new[i * DIM];
        t0 + (t1 - t0) * ((vp - v0) / (v1 - v0)).clamp(0.0, 1.0)
    }
}

fn first_non_finite(y: &[f64]) -> Option<usize> {
    y.iter().position(|v| !v.is_finite()).map(|j| j / DIM)
}

/// Cubic Hermite interpolant on a step of length `h` at fraction `s`.
#[inline]
pub(crate) fn hermite(y0: f64, f0: f64, y1: f64, f1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
}

/// Adaptive integration of `net` from `t = 0` to `cfg.t_end`. The
/// trajectory is resampled on a uniform grid of `sample_dt` ms (plus the end
/// point) by Hermite interpolation of the accepted steps; `net` is left in
/// the final state.
pub fn integrate_adaptive(
    net: &mut Network,
    cfg: &SimConfig,
    sample_dt: f64,
) -> Result<Trajectory, EngineError> {
    cfg.validate()?;
    if !(sample_dt > 0.0) {
        return Err(EngineError::InvalidConfig(
            "sample interval must be positive",
        ));
    }
    let dim = net.len() * DIM;
    let mut traj = Trajectory::new(dim);
    let mut y = net.flat_state();
    let mut t = 0.0;
    traj.push(0.0, &y);
    let mut next_k: u64 = 1;
    let mut buf = vec![0.0; dim];
    let mut spikes = SpikeRecord::new();
    let mut solver = AdaptiveSolver::new(cfg);
    let frozen = net.clone();
    solver.advance(
        &frozen,
        &mut t,
        &mut y,
        cfg.t_end,
        |te, i, _| {
            spikes.push(te, i);
            Flow::Continue
        },
        |t0, y0, f0, t1, y1, f1| {
            let h = t1 - t0;
            loop {
                let ts = next_k as f64 * sample_dt;
                if ts > t1 || ts > cfg.t_end {
                    break;
                }
                let s = ((ts - t0) / h).clamp(0.0, 1.0);
                for j in 0..dim {
                    buf[j] = hermite(y0[j], f0[j], y1[j], f1[j], h, s);
                }
                traj.times.push(ts);
                traj.states.extend_from_slice(&buf);
                next_k += 1;
            }
        },
    )?;
    if traj.times.last().copied() != Some(t) && t > 0.0 {
        traj.push(t, &y);
    }
    traj.spikes = spikes;
    net.set_flat_state(&y);
    Ok(traj)
}
