use crate::config::RunConfig;
use crate::output::{num, sig, write_csv, write_json, write_text};
use crate::CliError;
use serde::Serialize;
use spikelatch::cpg::{
    build_reversal, build_ring, is_cyclic_abcd, module_name, run_gait, summarize,
    summarize_reversal, GaitRun, GaitSummary, LoopMode, RingCpg, Stimulus, ACTUATORS, MODULES,
};
use spikelatch::engine::simulate_fixed;
use spikelatch::latch::{build_latch, default_pulse_amplitudes, stimulate, LatchError, PULSE_MS};
use spikelatch::montecarlo::{
    fisher_discriminant, run_trials, FailureRate, MonteCarloConfig, Variant,
};
use spikelatch::poincare::{assess, param_ranges, PoincareError, Verdict};
use spikelatch::{NeuronParam, SimConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Shared context of one invocation.
pub struct Context {
    pub cfg: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
}

const LATCH_CELLS: [&str; 3] = ["E1", "E2", "I"];

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn latch_err(e: LatchError) -> CliError {
    numerical(e)
}

/// Exit 4 unless the configured latch is viable.
fn require_viable(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.cfg;
    let exc = c.excitatory();
    let report =
        assess(&exc, &exc, &c.inhibitory(), &c.synapses, &c.poincare()).map_err(numerical)?;
    if report.verdict != Verdict::Viable {
        return Err(CliError::NotViable(format!(
            "nominal configuration is not viable ({})",
            report.verdict
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LatchArgs {
    pub set_at: Option<f64>,
    pub reset_at: Option<f64>,
    pub duration: Option<f64>,
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct LatchSummary {
    seed: u64,
    duration_ms: f64,
    set_at_ms: f64,
    reset_at_ms: f64,
    set_amplitude_pA: f64,
    reset_amplitude_pA: f64,
    spike_count: BTreeMap<&'static str, usize>,
    first_excitatory_spike_ms: Option<f64>,
    last_excitatory_spike_ms: Option<f64>,
    /// E1 and E2 spikes strictly alternate.
    alternating: bool,
}

pub fn simulate_latch(ctx: &Context, args: LatchArgs) -> Result<String, CliError> {
    let c = &ctx.cfg;
    let l = &c.latch;
    let set_at = args.set_at.unwrap_or(l.set_at);
    let reset_at = args.reset_at.unwrap_or(l.reset_at);
    let duration = args.duration.unwrap_or(l.duration);
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(CliError::Usage("--duration must be non-negative".into()));
    }
    let (mut net, topo) = build_latch(&c.excitatory(), &c.inhibitory(), &c.synapses);
    let (set_amp, reset_amp) = match (l.set_amplitude, l.reset_amplitude) {
        (Some(s), Some(r)) => (s, r),
        (s, r) => {
            let (ds, dr) = default_pulse_amplitudes(&net, &topo).map_err(latch_err)?;
            (s.unwrap_or(ds), r.unwrap_or(dr))
        }
    };
    stimulate(&mut net, topo.set_target(), set_amp, set_at, PULSE_MS);
    stimulate(&mut net, topo.reset_target(), reset_amp, reset_at, PULSE_MS);
    let sim = SimConfig {
        t_end: duration,
        ..c.engine
    };
    let stride = (l.sample_every / sim.dt).round().max(1.0) as usize;
    let traj = simulate_fixed(&mut net, &sim, stride).map_err(numerical)?;

    let mut header = vec!["time_ms".to_string()];
    for n in LATCH_CELLS {
        header.push(format!("v_{n}_mV"));
        header.push(format!("u_{n}_pA"));
        header.push(format!("x_{n}_dimless"));
        header.push(format!("y_{n}_dimless"));
    }
    let rows = traj.iter().map(|(t, y)| {
        std::iter::once(num(t))
            .chain(y.iter().map(|&v| num(v)))
            .collect()
    });
    write_csv(&ctx.out.join("latch_trace.csv"), &header, rows)?;

    let spike_header = vec!["time_ms".to_string(), "neuron".to_string()];
    let spike_rows = traj
        .spikes
        .events
        .iter()
        .map(|&(t, n)| vec![num(t), LATCH_CELLS[n].to_string()]);
    write_csv(&ctx.out.join("latch_spikes.csv"), &spike_header, spike_rows)?;

    let excit: Vec<(f64, usize)> = traj
        .spikes
        .events
        .iter()
        .copied()
        .filter(|&(_, n)| n == topo.e1 || n == topo.e2)
        .collect();
    let alternating = excit.windows(2).all(|w| w[0].1 != w[1].1);
    let summary = LatchSummary {
        seed: ctx.seed,
        duration_ms: duration,
        set_at_ms: set_at,
        reset_at_ms: reset_at,
        set_amplitude_pA: set_amp,
        reset_amplitude_pA: reset_amp,
        spike_count: LATCH_CELLS
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, traj.spikes.times(i).count()))
            .collect(),
        first_excitatory_spike_ms: excit.first().map(|e| e.0),
        last_excitatory_spike_ms: excit.last().map(|e| e.0),
        alternating,
    };
    write_json(&ctx.out.join("latch_summary.json"), &summary)?;
    Ok(format!(
        "latch: {} spikes, excitatory activity {} .. {} ms\n",
        traj.spikes.len(),
        summary.first_excitatory_spike_ms.map_or("-".into(), num),
        summary.last_excitatory_spike_ms.map_or("-".into(), num),
    ))
}

pub fn param_ranges_cmd(ctx: &Context, tol: Option<f64>) -> Result<String, CliError> {
    let c = &ctx.cfg;
    let tol = tol.unwrap_or(c.viability.scan_tol);
    if !(tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    require_viable(ctx)?;
    let rows = param_ranges(
        &c.excitatory(),
        &c.inhibitory(),
        &c.synapses,
        &c.poincare(),
        tol,
    )
    .map_err(|e| match e {
        PoincareError::NominalNotViable(v) => {
            CliError::NotViable(format!("nominal configuration is not viable ({v})"))
        }
        other => numerical(other),
    })?;

    let header: Vec<String> = ["param", "unit", "min", "nominal", "max"]
        .map(String::from)
        .to_vec();
    let csv_rows = rows.iter().map(|r| {
        vec![
            r.param.symbol().to_string(),
            r.param.unit().to_string(),
            num(r.min),
            num(r.nominal),
            num(r.max),
        ]
    });
    write_csv(&ctx.out.join("param_ranges.csv"), &header, csv_rows)?;

    let mut text = format!(
        "{:<6} {:>10} {:>10} {:>10}  {}\n",
        "param", "min", "nominal", "max", "unit"
    );
    for r in &rows {
        text.push_str(&format!(
            "{:<6} {:>10} {:>10} {:>10}  {}\n",
            r.param.symbol(),
            sig(r.min, 3),
            sig(r.nominal, 3),
            sig(r.max, 3),
            r.param.unit()
        ));
    }
    write_text(&ctx.out.join("param_ranges.txt"), &text)?;
    Ok(text)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MonteCarloArgs {
    pub variant: Option<Variant>,
    pub trials: Option<u64>,
    pub fraction: Option<f64>,
    pub emit_cloud: bool,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    variant: Variant,
    seed: u64,
    fraction: f64,
    #[serde(flatten)]
    rate: FailureRate,
    verdicts: BTreeMap<String, u64>,
}

/// Column names of a cloud's deviation vector.
pub fn cloud_columns(variant: Variant) -> Vec<String> {
    let cells: &[&str] = match variant {
        Variant::One => &["E1"],
        Variant::BothIdentical => &["E"],
        Variant::BothIndependent => &["E1", "E2"],
    };
    cells
        .iter()
        .flat_map(|c| NeuronParam::ALL.map(|p| format!("xi_{c}_{}_rel", p.symbol())))
        .collect()
}

pub fn montecarlo(ctx: &Context, args: MonteCarloArgs) -> Result<String, CliError> {
    let c = &ctx.cfg;
    let m = &c.montecarlo;
    let mc = MonteCarloConfig {
        variant: args.variant.unwrap_or(m.variant),
        trials: args.trials.unwrap_or(m.trials),
        seed: ctx.seed,
        fraction: args.fraction.unwrap_or(m.fraction),
        poincare: c.poincare(),
    };
    if mc.trials == 0 {
        return Err(CliError::Usage("-n must be at least 1".into()));
    }
    if !(mc.fraction >= 0.0 && mc.fraction.is_finite()) {
        return Err(CliError::Usage("--fraction must be non-negative".into()));
    }
    require_viable(ctx)?;
    let outcomes = run_trials(&mc, &c.excitatory(), &c.inhibitory(), &c.synapses);
    let rate = FailureRate::from_outcomes(&outcomes);
    let mut verdicts = BTreeMap::new();
    for o in &outcomes {
        let key = o.verdict.map_or("error".to_string(), |v| v.to_string());
        *verdicts.entry(key).or_insert(0u64) += 1;
    }
    let name = mc.variant.name();
    let summary = MonteCarloSummary {
        variant: mc.variant,
        seed: mc.seed,
        fraction: mc.fraction,
        rate,
        verdicts,
    };
    write_json(&ctx.out.join(format!("montecarlo_{name}.json")), &summary)?;

    if args.emit_cloud {
        let mut header = vec!["index".to_string()];
        header.extend(cloud_columns(mc.variant));
        header.extend(["label", "verdict", "variant", "seed"].map(String::from));
        let rows = outcomes.iter().map(|o| {
            let mut row = vec![o.index.to_string()];
            row.extend(o.xi.xi.iter().map(|&x| num(x)));
            row.push(if o.ok { "ok" } else { "fail" }.to_string());
            row.push(o.verdict.map_or("error".to_string(), |v| v.to_string()));
            row.push(name.to_string());
            row.push(mc.seed.to_string());
            row
        });
        write_csv(&ctx.out.join(format!("cloud_{name}.csv")), &header, rows)?;
    }
    Ok(format!(
        "{name}: {} of {} failed, rate {:.3}% (95% CI {:.3}% .. {:.3}%)\n",
        rate.failures,
        rate.trials,
        100.0 * rate.rate,
        100.0 * rate.ci_low,
        100.0 * rate.ci_high
    ))
}

#[derive(Serialize)]
struct Component {
    param: String,
    weight: f64,
}

#[derive(Serialize)]
struct ProjectionSummary {
    samples: usize,
    failures: usize,
    /// Axis components ranked by magnitude.
    axis: Vec<Component>,
    threshold: f64,
    separation: f64,
    regularized: bool,
}

pub fn project(ctx: &Context, cloud: &Path) -> Result<String, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", cloud.display()));
    let mut reader = csv::Reader::from_path(cloud).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let xi_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| headers[i].starts_with("xi_"))
        .collect();
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| bad("missing label column".into()))?;
    let index_col = headers.iter().position(|h| h == "index");
    if xi_cols.is_empty() {
        return Err(bad("no xi_ columns".into()));
    }
    let mut samples = Vec::new();
    let mut ok = Vec::new();
    let mut index = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = line + 2;
        let xi = xi_cols
            .iter()
            .map(|&i| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("line {row}: bad number {:?}", &rec[i])))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        samples.push(xi);
        ok.push(match &rec[label_col] {
            "ok" => true,
            "fail" => false,
            other => {
                return Err(bad(format!(
                    "line {row}: label must be ok or fail, got {other:?}"
                )))
            }
        });
        index.push(index_col.map_or(line.to_string(), |i| rec[i].to_string()));
    }
    let d = fisher_discriminant(&samples, &ok).map_err(numerical)?;

    let header: Vec<String> = ["index", "axis_rel", "ortho_rel", "label"]
        .map(String::from)
        .to_vec();
    let rows = d
        .projections
        .iter()
        .zip(&ok)
        .zip(&index)
        .map(|((p, &o), i)| {
            vec![
                i.clone(),
                num(p[0]),
                num(p[1]),
                if o { "ok" } else { "fail" }.to_string(),
            ]
        });
    write_csv(&ctx.out.join("projection.csv"), &header, rows)?;

    let mut axis: Vec<Component> = xi_cols
        .iter()
        .zip(&d.axis)
        .map(|(&i, &w)| Component {
            param: headers[i]
                .trim_start_matches("xi_")
                .trim_end_matches("_rel")
                .to_string(),
            weight: w,
        })
        .collect();
    axis.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
    let summary = ProjectionSummary {
        samples: samples.len(),
        failures: ok.iter().filter(|o| !**o).count(),
        axis,
        threshold: d.threshold,
        separation: d.separation,
        regularized: d.regularized,
    };
    write_json(&ctx.out.join("projection.json"), &summary)?;
    let top: Vec<&str> = summary
        .axis
        .iter()
        .take(3)
        .map(|c| c.param.as_str())
        .collect();
    Ok(format!(
        "projection: {} samples, separation {:.1}%, top components {}\n",
        summary.samples,
        100.0 * summary.separation,
        top.join(", ")
    ))
}

#[derive(Serialize)]
struct RingReport {
    word: String,
    cyclic_abcd: bool,
    cycles: usize,
    cycle_period_ms: Option<f64>,
    dwell_ms: BTreeMap<String, Option<f64>>,
    excursion_stroke: BTreeMap<String, Option<f64>>,
}

impl From<&GaitSummary> for RingReport {
    fn from(s: &GaitSummary) -> Self {
        Self {
            word: s.word.clone(),
            cyclic_abcd: is_cyclic_abcd(&s.word),
            cycles: s.cycles,
            cycle_period_ms: s.cycle_period,
            dwell_ms: (0..MODULES)
                .map(|m| (module_name(m).to_string(), s.dwell[m]))
                .collect(),
            excursion_stroke: (0..ACTUATORS)
                .map(|a| (format!("z{}", a + 1), s.excursion[a]))
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct GaitReport {
    mode: LoopMode,
    seed: u64,
    duration_ms: f64,
    #[serde(flatten)]
    ring: RingReport,
}

fn neuron_labels(cpg: &RingCpg) -> Vec<String> {
    let mut names = vec![String::new(); cpg.neuron_count()];
    let many = cpg.rings.len() > 1;
    for (r, ring) in cpg.rings.iter().enumerate() {
        let prefix = match (many, r) {
            (false, _) => "",
            (true, 0) => "f",
            (true, _) => "r",
        };
        for (m, t) in ring.modules.iter().enumerate() {
            for (cell, idx) in [("E1", t.e1), ("E2", t.e2), ("I", t.i)] {
                names[idx] = format!("{prefix}{}_{cell}", module_name(m));
            }
        }
    }
    if let Some(trig) = cpg.trigger {
        names[trig] = "trigger".into();
    }
    names
}

fn write_gait_trace(path: &Path, cpg: &RingCpg, run: &GaitRun) -> Result<(), CliError> {
    let mut header = vec!["time_ms".to_string()];
    header.extend(neuron_labels(cpg).iter().map(|n| format!("v_{n}_mV")));
    for a in 1..=ACTUATORS {
        header.push(format!("effort_ext{a}_frac"));
        header.push(format!("effort_flx{a}_frac"));
    }
    header.extend((1..=ACTUATORS).map(|a| format!("z{a}_stroke")));
    header.extend((0..MODULES).map(|m| format!("feedback_{}_pA", module_name(m))));
    let tr = &run.trace;
    let rows = (0..tr.times.len()).map(|k| {
        let mut row = vec![num(tr.times[k])];
        row.extend(tr.voltages[k].iter().map(|&v| num(v)));
        row.extend(tr.efforts[k].iter().map(|&v| num(v)));
        row.extend(tr.z[k].iter().map(|&v| num(v)));
        row.extend(tr.feedback[k].iter().map(|&v| num(v)));
        row
    });
    write_csv(path, &header, rows)
}

fn check_duration(d: f64) -> Result<(), CliError> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage("--duration must be non-negative".into()))
    }
}

pub fn gait(ctx: &Context, mode: LoopMode, duration: Option<f64>) -> Result<String, CliError> {
    let c = &ctx.cfg;
    let duration = duration.unwrap_or(c.gait.duration);
    check_duration(duration)?;
    let cpg = build_ring(&c.excitatory(), &c.inhibitory(), &c.synapses, &c.muscle);
    let run = run_gait(&cpg, mode, duration, &c.gait_config(), &[]).map_err(numerical)?;
    let tag = match mode {
        LoopMode::Open => "open",
        LoopMode::Closed => "closed",
    };
    write_gait_trace(&ctx.out.join(format!("gait_{tag}_trace.csv")), &cpg, &run)?;
    let report = GaitReport {
        mode,
        seed: ctx.seed,
        duration_ms: duration,
        ring: RingReport::from(&summarize(&cpg, &run)),
    };
    write_json(&ctx.out.join(format!("gait_{tag}_summary.json")), &report)?;
    Ok(format!(
        "gait ({tag}): {} cycles, period {} ms\n",
        report.ring.cycles,
        report
            .ring
            .cycle_period_ms
            .map_or("-".into(), |p| sig(p, 4))
    ))
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct ReversalReport {
    seed: u64,
    duration_ms: f64,
    stimulus_at_ms: f64,
    stimulus_duration_ms: f64,
    stimulus_amplitude_pA: f64,
    forward: RingReport,
    reverse: RingReport,
    forward_last_end_ms: Option<f64>,
    forward_bursts_after_stimulus: usize,
    reverse_first_start_ms: Option<f64>,
    state_period_ms: Option<f64>,
    switched: bool,
}

pub fn reversal(
    ctx: &Context,
    stimulus_at: Option<f64>,
    duration: Option<f64>,
) -> Result<String, CliError> {
    let c = &ctx.cfg;
    let stim = Stimulus {
        at: stimulus_at.unwrap_or(c.reversal.stimulus.at),
        ..c.reversal.stimulus
    };
    if !stim.at.is_finite() {
        return Err(CliError::Usage("--stimulus-at must be finite".into()));
    }
    let duration = duration.unwrap_or((stim.at + c.reversal.after).max(0.0));
    check_duration(duration)?;
    let cpg = build_reversal(&c.excitatory(), &c.inhibitory(), &c.synapses, &c.muscle);
    let run =
        run_gait(&cpg, LoopMode::Closed, duration, &c.gait_config(), &[stim]).map_err(numerical)?;
    write_gait_trace(&ctx.out.join("reversal_trace.csv"), &cpg, &run)?;
    let s = summarize_reversal(&cpg, &run, stim.at);
    let report = ReversalReport {
        seed: ctx.seed,
        duration_ms: duration,
        stimulus_at_ms: stim.at,
        stimulus_duration_ms: stim.duration,
        stimulus_amplitude_pA: stim.amplitude,
        forward: RingReport::from(&s.forward),
        reverse: RingReport::from(&s.reverse),
        forward_last_end_ms: s.forward_last_end,
        forward_bursts_after_stimulus: s.forward_bursts_after,
        reverse_first_start_ms: s.reverse_first_start,
        state_period_ms: s.state_period,
        switched: s.switched,
    };
    write_json(&ctx.out.join("reversal_summary.json"), &report)?;
    Ok(format!(
        "reversal at {} ms: {}\n",
        num(stim.at),
        if s.switched {
            "switched to reverse ring"
        } else {
            "no switch"
        }
    ))
}
