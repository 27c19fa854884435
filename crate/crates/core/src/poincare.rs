//! Viability certification of a latch.
//!
//! A parameter set is viable when the module has both an attracting rest
//! state and an attracting spiking limit cycle, and a single firing of its
//! own reset interneuron is enough to move it from the cycle to rest.
//!
//! The cycle is found as a fixed point of the first-return map on the
//! section `v_E1 = V_p`, taken just after `E1`'s reset, by Picard iteration.

use crate::engine::{AdaptiveSolver, Advance, EngineError, Flow, SimConfig};
use crate::latch::{build_latch_pair, LatchTopology, SynapticParam, SynapticParams};
use crate::network::Network;
use crate::neuron::{spike_reset, NeuronParam, NeuronParams, NeuronState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

const DIM: usize = NeuronState::DIM;

/// Equilibria of a single cell with `(u, x, y) = (b (v - V_r), 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestingPoints {
    /// Stable node.
    pub node: f64,
    /// Saddle separating the node from the firing threshold.
    pub saddle: f64,
    pub kind: RestKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestKind {
    /// Two distinct hyperbolic equilibria.
    NodeAndSaddle,
    /// The two roots coincide: transcritical point, half-stable equilibrium.
    Transcritical,
    /// `k = 0`: the voltage dynamics are linear.
    Degenerate,
}

/// Roots of the reduced voltage dynamics `(v - V_r)(k (v - V_t) - b) = 0`,
/// i.e. `v = V_r` and `v = V_t + b / k`. Coincidence within `1e-9 mV`
/// flags the transcritical case `b / k = -(V_t - V_r)`.
pub fn resting_fixed_point(p: &NeuronParams) -> RestingPoints {
    if p.k == 0.0 {
        return RestingPoints {
            node: p.v_r,
            saddle: f64::INFINITY,
            kind: RestKind::Degenerate,
        };
    }
    let other = p.v_t + p.b / p.k;
    let kind = if (other - p.v_r).abs() < 1e-9 {
        RestKind::Transcritical
    } else {
        RestKind::NodeAndSaddle
    };
    // The node is the lower root for k > 0: f'(v) = k(2v - V_r - V_t) - b is
    // negative below the midpoint of the two roots.
    let (node, saddle) = if p.v_r <= other {
        (p.v_r, other)
    } else {
        (other, p.v_r)
    };
    RestingPoints { node, saddle, kind }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Viable,
    RestsGlobally,
    Chaotic,
    PeriodTooShort,
    ResetFails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Viable => "viable",
            Verdict::RestsGlobally => "rests-globally",
            Verdict::Chaotic => "chaotic",
            Verdict::PeriodTooShort => "period-too-short",
            Verdict::ResetFails => "reset-fails",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViabilityReport {
    pub verdict: Verdict,
    /// Limit-cycle period (ms) when a cycle was found.
    pub period: Option<f64>,
    /// Post-reset network state on the section at the fixed point.
    pub fixed_point: Option<Vec<f64>>,
    pub iterations: usize,
}

impl ViabilityReport {
    pub fn is_viable(&self) -> bool {
        self.verdict == Verdict::Viable
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoincareError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("nominal configuration is not viable ({0})")]
    NominalNotViable(Verdict),
    #[error("no G_rst up to {0} nS makes the interneuron fire during the cycle")]
    ResetBracketExhausted(f64),
    #[error("section state must have v_E1 at its reset value")]
    NotOnSection,
}

/// Settings of the viability oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    pub sim: SimConfig,
    /// Longest wait for the next `E1` spike before declaring no return (ms).
    pub return_horizon: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    /// Per-variable scales `(v, u, x, y)` of the Picard convergence norm.
    pub scales: [f64; 4],
    /// Shortest acceptable limit-cycle period (ms).
    pub min_period: f64,
    /// Upper end of the `G_rst` search in the reset check (nS).
    pub reset_search_max: f64,
    /// Relative resolution of the `G_rst` search.
    pub reset_search_tol: f64,
    /// Factor applied to the smallest `G_rst` that fires the interneuron
    /// before checking that the self-triggered reset silences the module.
    pub reset_overdrive: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            return_horizon: 500.0,
            picard_tol: 1e-5,
            max_iter: 200,
            scales: [1.0, 10.0, 0.01, 0.01],
            min_period: 5.0,
            reset_search_max: 1000.0,
            reset_search_tol: 1e-2,
            reset_overdrive: 2.0,
        }
    }
}

/// A point of the return map's image.
#[derive(Debug, Clone, PartialEq)]
pub enum Return {
    /// Next post-reset section state and the time taken to reach it.
    Hit { state: Vec<f64>, elapsed: f64 },
    /// `E1` did not fire again within the horizon.
    NoReturn,
}

/// A latch together with a reusable integrator.
#[derive(Debug, Clone)]
pub struct LatchSystem {
    pub net: Network,
    pub topo: LatchTopology,
    cfg: PoincareConfig,
    solver: AdaptiveSolver,
    distances: Vec<f64>,
}

impl LatchSystem {
    pub fn new(net: Network, topo: LatchTopology, cfg: PoincareConfig) -> Self {
        let solver = AdaptiveSolver::new(&cfg.sim);
        Self {
            net,
            topo,
            cfg,
            solver,
            distances: Vec::new(),
        }
    }

    /// Scaled distances between successive Picard iterates of the last
    /// [`find_limit_cycle`](Self::find_limit_cycle) call.
    pub fn picard_distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn config(&self) -> &PoincareConfig {
        &self.cfg
    }

    /// Accepted integration steps so far.
    pub fn steps(&self) -> u64 {
        self.solver.steps()
    }

    /// Section point reached when `E1` fires once from rest.
    pub fn initial_section_point(&self) -> Vec<f64> {
        let mut net = self.net.clone();
        net.reset_to_rest();
        let e1 = self.topo.e1;
        let mut s = *net.state(e1);
        s.v = net.params(e1).v_p;
        net.set_state(e1, spike_reset(net.params(e1), &s));
        net.flat_state()
    }

    /// First return to the section from a post-reset section state
    /// (`v_E1` equal to `E1`'s reset voltage).
    pub fn return_map(&mut self, state: &[f64]) -> Result<Return, PoincareError> {
        let e1v = state.get(self.topo.e1 * DIM).copied();
        if state.len() != self.net.len() * DIM || e1v != Some(self.net.params(self.topo.e1).c) {
            return Err(PoincareError::NotOnSection);
        }
        Ok(self.return_map_unchecked(state)?)
    }

    fn return_map_unchecked(&mut self, state: &[f64]) -> Result<Return, EngineError> {
        let mut y = state.to_vec();
        let mut t = 0.0;
        let e1 = self.topo.e1;
        let out = self.solver.advance(
            &self.net,
            &mut t,
            &mut y,
            self.cfg.return_horizon,
            |_, i, _| if i == e1 { Flow::Stop } else { Flow::Continue },
            |_, _, _, _, _, _| {},
        )?;
        Ok(match out {
            Advance::Stopped(te) => Return::Hit {
                state: y,
                elapsed: te,
            },
            Advance::Completed => Return::NoReturn,
        })
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(j, (x, y))| (x - y).abs() / self.cfg.scales[j % DIM])
            .fold(0.0, f64::max)
    }

    /// Picard iteration of the return map from the initial section point.
    pub fn find_limit_cycle(&mut self) -> Result<ViabilityReport, EngineError> {
        let mut x = self.initial_section_point();
        self.distances.clear();
        for it in 1..=self.cfg.max_iter {
            match self.return_map_unchecked(&x)? {
                Return::NoReturn => {
                    return Ok(ViabilityReport {
                        verdict: Verdict::RestsGlobally,
                        period: None,
                        fixed_point: None,
                        iterations: it,
                    })
                }
                Return::Hit { state, elapsed } => {
                    let d = self.distance(&state, &x);
                    self.distances.push(d);
                    x = state;
                    if d < self.cfg.picard_tol {
                        let verdict = if elapsed > self.cfg.min_period {
                            Verdict::Viable
                        } else {
                            Verdict::PeriodTooShort
                        };
                        return Ok(ViabilityReport {
                            verdict,
                            period: Some(elapsed),
                            fixed_point: Some(x),
                            iterations: it,
                        });
                    }
                }
            }
        }
        Ok(ViabilityReport {
            verdict: Verdict::Chaotic,
            period: None,
            fixed_point: None,
            iterations: self.cfg.max_iter,
        })
    }

    /// Whether the interneuron fires within `horizon` ms from `state`, and
    /// whether `E1` is still firing at the end. With `stop_on_reset` the run
    /// ends at the first interneuron spike.
    fn probe(
        &mut self,
        state: &[f64],
        horizon: f64,
        stop_on_reset: bool,
    ) -> Result<(bool, bool), EngineError> {
        let mut y = state.to_vec();
        let mut t = 0.0;
        let (e1, inh) = (self.topo.e1, self.topo.i);
        let mut i_fired = false;
        let mut last_e1 = 0.0;
        self.solver.advance(
            &self.net,
            &mut t,
            &mut y,
            horizon,
            |te, i, _| {
                if i == e1 {
                    last_e1 = te;
                }
                if i == inh {
                    i_fired = true;
                    if stop_on_reset {
                        return Flow::Stop;
                    }
                }
                Flow::Continue
            },
            |_, _, _, _, _, _| {},
        )?;
        let still = last_e1 > horizon - self.cfg.return_horizon.min(0.5 * horizon);
        Ok((i_fired, still))
    }

    fn set_g_rst(&mut self, g: f64) {
        let t = self.topo;
        self.net.set_conductance(t.i, t.e1, g);
        self.net.set_conductance(t.i, t.e2, g);
    }

    /// Smallest `G_rst` (to the configured resolution) at which the
    /// interneuron fires when started from `state`.
    pub fn minimal_reset_drive(&mut self, state: &[f64]) -> Result<f64, PoincareError> {
        let t = self.topo;
        let g0 = self.net.conductance(t.i, t.e1);
        // Until the interneuron fires it has no effect on the excitatory
        // cells, so its periodically driven response settles well within
        // one return horizon.
        let horizon = self.cfg.return_horizon;
        let result = self.search_reset_drive(state, g0, horizon);
        self.set_g_rst(g0);
        result
    }

    fn search_reset_drive(
        &mut self,
        state: &[f64],
        g0: f64,
        horizon: f64,
    ) -> Result<f64, PoincareError> {
        let (max, rel) = (self.cfg.reset_search_max, self.cfg.reset_search_tol);
        let mut fires = |g: f64| -> Result<bool, EngineError> {
            self.set_g_rst(g);
            Ok(self.probe(state, horizon, true)?.0)
        };
        if g0 > 0.0 && fires(g0)? {
            return Ok(g0);
        }
        let mut lo = g0;
        let mut hi = if g0 > 0.0 { 2.0 * g0 } else { 1.0 };
        while !fires(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > max {
                return Err(PoincareError::ResetBracketExhausted(max));
            }
        }
        while hi - lo > rel * hi {
            let mid = 0.5 * (lo + hi);
            if fires(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Raises `G_rst` until the module triggers its own reset from the limit
    /// cycle (the smallest firing value times `reset_overdrive`) and checks
    /// that the resulting inhibition silences the module.
    pub fn reset_viability(&mut self, fixed_point: &[f64]) -> Result<bool, PoincareError> {
        let t = self.topo;
        let g0 = self.net.conductance(t.i, t.e1);
        let g = self.minimal_reset_drive(fixed_point)? * self.cfg.reset_overdrive;
        self.set_g_rst(g);
        let probed = self.probe(fixed_point, 2.0 * self.cfg.return_horizon, false);
        self.set_g_rst(g0);
        let (fired, still) = probed?;
        Ok(fired && !still)
    }

    /// Full viability verdict: limit cycle, period and reset check.
    pub fn viability(&mut self) -> Result<ViabilityReport, PoincareError> {
        let mut report = self.find_limit_cycle()?;
        if report.verdict != Verdict::Viable {
            return Ok(report);
        }
        let fp = report
            .fixed_point
            .clone()
            .expect("viable has a fixed point");
        match self.reset_viability(&fp) {
            Ok(true) => {}
            Ok(false) | Err(PoincareError::ResetBracketExhausted(_)) => {
                report.verdict = Verdict::ResetFails
            }
            Err(e) => return Err(e),
        }
        Ok(report)
    }
}

/// Viability of a latch with the given cells and synapses. Integration
/// failures count as non-viable.
pub fn assess(
    e1: &NeuronParams,
    e2: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    cfg: &PoincareConfig,
) -> Result<ViabilityReport, PoincareError> {
    let (net, topo) = build_latch_pair(e1, e2, inh, syn);
    LatchSystem::new(net, topo, *cfg).viability()
}

/// A scalar knob of the latch for range scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanParam {
    /// A cell constant applied to both excitatory cells.
    Neuron(NeuronParam),
    Synaptic(SynapticParam),
}

impl ScanParam {
    /// The fourteen rows of the parameter-range table.
    pub const TABLE: [ScanParam; 14] = [
        ScanParam::Neuron(NeuronParam::A),
        ScanParam::Neuron(NeuronParam::B),
        ScanParam::Neuron(NeuronParam::C),
        ScanParam::Neuron(NeuronParam::D),
        ScanParam::Neuron(NeuronParam::Cap),
        ScanParam::Neuron(NeuronParam::K),
        ScanParam::Neuron(NeuronParam::VRest),
        ScanParam::Neuron(NeuronParam::VThresh),
        ScanParam::Neuron(NeuronParam::VPeak),
        ScanParam::Neuron(NeuronParam::VRev),
        ScanParam::Neuron(NeuronParam::Tau),
        ScanParam::Synaptic(SynapticParam::Exc),
        ScanParam::Synaptic(SynapticParam::Rst),
        ScanParam::Synaptic(SynapticParam::Inh),
    ];

    pub fn symbol(&self) -> &'static str {
        match self {
            ScanParam::Neuron(p) => p.symbol(),
            ScanParam::Synaptic(s) => s.symbol(),
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            ScanParam::Neuron(p) => p.unit(),
            ScanParam::Synaptic(_) => "nS",
        }
    }

    pub fn nominal(&self, exc: &NeuronParams, syn: &SynapticParams) -> f64 {
        match self {
            ScanParam::Neuron(p) => exc.get(*p),
            ScanParam::Synaptic(s) => syn.get(*s),
        }
    }

    /// Search bracket `(low edge, high edge)` and whether each edge is a
    /// hard domain limit (reported as its value) rather than an open end
    /// (reported as infinite when still viable).
    pub fn bracket(&self, exc: &NeuronParams, syn: &SynapticParams) -> Bracket {
        let nominal = self.nominal(exc, syn);
        match self {
            ScanParam::Neuron(p) => match p {
                NeuronParam::K => Bracket::new(0.0, true, 10.0 * nominal, false),
                NeuronParam::B => Bracket::new(10.0 * nominal, false, 0.0, true),
                NeuronParam::C
                | NeuronParam::VRest
                | NeuronParam::VThresh
                | NeuronParam::VRev
                | NeuronParam::VPeak => {
                    Bracket::new(nominal - 100.0, false, nominal + 100.0, false)
                }
                _ => Bracket::new(nominal / 10.0, false, nominal * 10.0, false),
            },
            ScanParam::Synaptic(SynapticParam::Rst) => {
                Bracket::new(0.0, true, 10.0 * nominal, false)
            }
            ScanParam::Synaptic(_) => Bracket::new(nominal / 10.0, false, nominal * 10.0, false),
        }
    }

    pub fn apply(
        &self,
        exc: &NeuronParams,
        syn: &SynapticParams,
        value: f64,
    ) -> (NeuronParams, SynapticParams) {
        match self {
            ScanParam::Neuron(p) => (exc.with(*p, value), *syn),
            ScanParam::Synaptic(s) => (*exc, syn.with(*s, value)),
        }
    }
}

impl fmt::Display for ScanParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub low: f64,
    pub low_is_limit: bool,
    pub high: f64,
    pub high_is_limit: bool,
}

impl Bracket {
    pub fn new(low: f64, low_is_limit: bool, high: f64, high_is_limit: bool) -> Self {
        Self {
            low,
            low_is_limit,
            high,
            high_is_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// Grid points between the nominal value and a bracket edge visited before
/// bisecting. Viability is not monotone in every parameter (a failing band
/// can be followed by a viable one), so the boundary reported is the one
/// nearest the nominal value.
pub const SCAN_STEPS: usize = 40;

/// Boundary of the viable range of one parameter, moving away from the
/// nominal value in `direction`. The segment to the bracket edge is walked
/// on a grid (geometric when the edge has the nominal's sign, linear
/// otherwise) and the first failing cell is bisected to relative tolerance
/// `tol`. If the whole segment is viable the result is the edge value for a
/// hard domain limit and an infinity for an open edge.
pub fn scan_param_range(
    param: ScanParam,
    direction: Direction,
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    cfg: &PoincareConfig,
    tol: f64,
) -> Result<f64, PoincareError> {
    scan_param_range_on(param, direction, ScanCells::Both, exc, inh, syn, cfg, tol)
}

/// Which excitatory cells a cell-constant scan modifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanCells {
    Both,
    E1,
    E2,
}

/// [`scan_param_range`] with a choice of modified cells; the other cell
/// keeps `exc`. Ignored for synaptic parameters.
#[allow(clippy::too_many_arguments)]
pub fn scan_param_range_on(
    param: ScanParam,
    direction: Direction,
    cells: ScanCells,
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    cfg: &PoincareConfig,
    tol: f64,
) -> Result<f64, PoincareError> {
    let verdict = |v: f64| -> Result<Verdict, PoincareError> {
        let (e, s) = param.apply(exc, syn, v);
        let (e1, e2) = match cells {
            ScanCells::Both => (e, e),
            ScanCells::E1 => (e, *exc),
            ScanCells::E2 => (*exc, e),
        };
        match assess(&e1, &e2, inh, &s, cfg) {
            Ok(r) => Ok(r.verdict),
            Err(PoincareError::Engine(_)) => Ok(Verdict::RestsGlobally),
            Err(e) => Err(e),
        }
    };
    let viable = |v: f64| verdict(v).map(|r| r == Verdict::Viable);
    let nominal = param.nominal(exc, syn);
    let at_nominal = verdict(nominal)?;
    if at_nominal != Verdict::Viable {
        return Err(PoincareError::NominalNotViable(at_nominal));
    }
    let b = param.bracket(exc, syn);
    let (edge, is_limit, inf) = match direction {
        Direction::Up => (b.high, b.high_is_limit, f64::INFINITY),
        Direction::Down => (b.low, b.low_is_limit, f64::NEG_INFINITY),
    };
    let geometric = nominal != 0.0 && edge != 0.0 && nominal.signum() == edge.signum();
    let point = |j: usize| {
        let f = j as f64 / SCAN_STEPS as f64;
        if j == SCAN_STEPS {
            edge
        } else if geometric {
            nominal * (edge / nominal).powf(f)
        } else {
            nominal + (edge - nominal) * f
        }
    };
    let mut good = nominal;
    let mut bad = None;
    for j in 1..=SCAN_STEPS {
        let v = point(j);
        if viable(v)? {
            good = v;
        } else {
            bad = Some(v);
            break;
        }
    }
    let Some(mut bad) = bad else {
        return Ok(if is_limit { edge } else { inf });
    };
    let scale = nominal.abs().max(0.1 * (edge - nominal).abs());
    while (bad - good).abs() > tol * scale {
        let mid = 0.5 * (good + bad);
        if viable(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// One row of the parameter-range table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub param: ScanParam,
    pub min: f64,
    pub nominal: f64,
    pub max: f64,
}

/// Both boundaries of every parameter in [`ScanParam::TABLE`]. The
/// 28 one-sided scans are independent and run on the rayon pool.
pub fn param_ranges(
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    cfg: &PoincareConfig,
    tol: f64,
) -> Result<Vec<ParamRange>, PoincareError> {
    let jobs: Vec<(ScanParam, Direction)> = ScanParam::TABLE
        .iter()
        .flat_map(|&p| [(p, Direction::Down), (p, Direction::Up)])
        .collect();
    let bounds: Vec<f64> = jobs
        .par_iter()
        .map(|&(p, d)| scan_param_range(p, d, exc, inh, syn, cfg, tol))
        .collect::<Result<_, _>>()?;
    Ok(ScanParam::TABLE
        .iter()
        .zip(bounds.chunks(2))
        .map(|(&param, b)| ParamRange {
            param,
            min: b[0],
            nominal: param.nominal(exc, syn),
            max: b[1],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rs_resting_roots() {
        let r = resting_fixed_point(&NeuronParams::RS);
        assert_eq!(r.kind, RestKind::NodeAndSaddle);
        assert_eq!(r.node, -60.0);
        assert!((r.saddle - (-40.0 - 2.0 / 0.7)).abs() < 1e-12);
        assert!((r.saddle - -42.857).abs() < 1e-3);
    }

    #[test]
    fn transcritical_point() {
        let p = NeuronParams::RS.with(NeuronParam::B, -14.0);
        assert_eq!(resting_fixed_point(&p).kind, RestKind::Transcritical);
    }

    #[test]
    fn zero_b_roots_are_rest_and_threshold() {
        let p = NeuronParams::RS.with(NeuronParam::B, 0.0);
        let r = resting_fixed_point(&p);
        assert_eq!((r.node, r.saddle), (-60.0, -40.0));
    }

    #[test]
    fn zero_k_is_degenerate() {
        let p = NeuronParams::RS.with(NeuronParam::K, 0.0);
        assert_eq!(resting_fixed_point(&p).kind, RestKind::Degenerate);
    }
}
