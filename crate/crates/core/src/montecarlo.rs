//! Robustness of the latch to random parameter deviations.
//!
//! Each trial draws a direction `ξ` uniformly on the unit sphere of the
//! eleven cell constants, scales every constant of the excitatory cell(s) by
//! `1 + fraction · ξ_i`, and labels the result with the full viability
//! oracle. The labeled cloud can then be projected on its Fisher
//! discriminant axis.

use crate::latch::SynapticParams;
use crate::neuron::{NeuronParam, NeuronParams};
use crate::poincare::{assess, PoincareConfig, Verdict};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const DIM: usize = NeuronParam::COUNT;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error("fisher discriminant needs both viable and failing samples")]
    OneClass,
    #[error("samples have inconsistent dimensions")]
    Dimension,
    #[error("within-class scatter is singular even after regularization")]
    Singular,
    #[error("unknown variant `{0}` (expected one, both-identical or both-independent)")]
    UnknownVariant(String),
}

/// Which excitatory cells are perturbed, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Only `E1`.
    One,
    /// The same deviation on both cells.
    BothIdentical,
    /// Independent deviations on each cell.
    BothIndependent,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::One,
        Variant::BothIdentical,
        Variant::BothIndependent,
    ];

    /// Length of the deviation vector drawn per trial.
    pub fn dim(self) -> usize {
        match self {
            Variant::BothIndependent => 2 * DIM,
            _ => DIM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::One => "one",
            Variant::BothIdentical => "both-identical",
            Variant::BothIndependent => "both-independent",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = MonteCarloError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| MonteCarloError::UnknownVariant(s.to_string()))
    }
}

/// Relative deviation of one or two cells, one unit-norm block of
/// [`DIM`] entries per independently perturbed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationVector {
    pub xi: Vec<f64>,
}

impl DeviationVector {
    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        self.xi.chunks(DIM)
    }
}

/// A direction uniform on the unit sphere in `dim` dimensions.
///
/// # Panics
/// If `dim` is zero.
pub fn sample_unit_deviation<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DeviationVector {
    assert!(dim >= 1, "deviation dimension must be positive");
    loop {
        let xi: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return DeviationVector {
                xi: xi.into_iter().map(|x| x / norm).collect(),
            };
        }
    }
}

/// Deviation of one trial: an independent unit block per perturbed cell.
pub fn sample_variant_deviation<R: Rng + ?Sized>(rng: &mut R, variant: Variant) -> DeviationVector {
    let xi = (0..variant.dim() / DIM)
        .flat_map(|_| sample_unit_deviation(rng, DIM).xi)
        .collect();
    DeviationVector { xi }
}

/// `p_i (1 + fraction · ξ_i)` for each cell constant, in the order of
/// [`NeuronParam::ALL`]. The deviation is relative to the signed base value.
///
/// # Panics
/// If `xi` does not have [`DIM`] entries.
pub fn apply_deviation(p: &NeuronParams, xi: &[f64], fraction: f64) -> NeuronParams {
    assert_eq!(xi.len(), DIM, "one entry per cell constant");
    let mut out = *p;
    for (param, x) in NeuronParam::ALL.into_iter().zip(xi) {
        out.set(param, p.get(param) * (1.0 + fraction * x));
    }
    out
}

/// Excitatory cells `(E1, E2)` of a perturbed latch.
pub fn perturbed_pair(
    base: &NeuronParams,
    variant: Variant,
    xi: &DeviationVector,
    fraction: f64,
) -> (NeuronParams, NeuronParams) {
    match variant {
        Variant::One => (apply_deviation(base, &xi.xi, fraction), *base),
        Variant::BothIdentical => {
            let e = apply_deviation(base, &xi.xi, fraction);
            (e, e)
        }
        Variant::BothIndependent => (
            apply_deviation(base, &xi.xi[..DIM], fraction),
            apply_deviation(base, &xi.xi[DIM..], fraction),
        ),
    }
}

/// Label of one trial. `verdict` is `None` when the oracle itself failed
/// (integration blow-up, exhausted reset search); such trials count as
/// failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: u64,
    pub variant: Variant,
    pub xi: DeviationVector,
    pub ok: bool,
    pub verdict: Option<Verdict>,
}

/// Settings of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub variant: Variant,
    pub trials: u64,
    pub seed: u64,
    /// Size of the relative deviation.
    pub fraction: f64,
    pub poincare: PoincareConfig,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            variant: Variant::BothIdentical,
            trials: 100_000,
            seed: 0,
            fraction: 0.10,
            poincare: PoincareConfig::default(),
        }
    }
}

/// Random stream of trial `index`: independent of how trials are scheduled.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws and labels trial `index`.
pub fn run_trial(
    cfg: &MonteCarloConfig,
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
    index: u64,
) -> TrialOutcome {
    let mut rng = trial_rng(cfg.seed, index);
    let xi = sample_variant_deviation(&mut rng, cfg.variant);
    let (e1, e2) = perturbed_pair(exc, cfg.variant, &xi, cfg.fraction);
    let verdict = assess(&e1, &e2, inh, syn, &cfg.poincare)
        .ok()
        .map(|r| r.verdict);
    TrialOutcome {
        index,
        variant: cfg.variant,
        xi,
        ok: verdict == Some(Verdict::Viable),
        verdict,
    }
}

/// Runs `cfg.trials` trials on the rayon pool, in index order.
pub fn run_trials(
    cfg: &MonteCarloConfig,
    exc: &NeuronParams,
    inh: &NeuronParams,
    syn: &SynapticParams,
) -> Vec<TrialOutcome> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, exc, inh, syn, i))
        .collect()
}

/// Failure count with a Wilson score 95% interval on the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureRate {
    pub trials: u64,
    pub failures: u64,
    /// Failures where the oracle itself errored.
    pub errors: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FailureRate {
    pub fn from_counts(trials: u64, failures: u64, errors: u64) -> Self {
        let n = trials as f64;
        let (rate, lo, hi) = if trials == 0 {
            (f64::NAN, 0.0, 1.0)
        } else {
            let p = failures as f64 / n;
            let z2 = Z95 * Z95;
            let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
            let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
            (p, (centre - half).max(0.0), (centre + half).min(1.0))
        };
        Self {
            trials,
            failures,
            errors,
            rate,
            ci_low: lo,
            ci_high: hi,
        }
    }

    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let failures = outcomes.iter().filter(|o| !o.ok).count() as u64;
        let errors = outcomes.iter().filter(|o| o.verdict.is_none()).count() as u64;
        Self::from_counts(outcomes.len() as u64, failures, errors)
    }
}

/// Fisher discriminant of a labeled deviation cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discriminant {
    /// Unit axis, pointing from the viable class towards the failing class.
    pub axis: Vec<f64>,
    /// Unit vector orthogonal to `axis` used as the second plot coordinate.
    pub ortho: Vec<f64>,
    /// Midpoint of the two projected class means.
    pub threshold: f64,
    /// `(axis · ξ, ortho · ξ)` per sample, in input order.
    pub projections: Vec<[f64; 2]>,
    /// Fraction of samples on the side of `threshold` matching their label.
    pub separation: f64,
    /// Whether the ridge term was needed to invert the scatter matrix.
    pub regularized: bool,
}

/// Ridge added to the within-class scatter when it is singular.
pub const FISHER_RIDGE: f64 = 1e-6;

/// Fisher axis `w ∝ S_w⁻¹ (μ_fail − μ_ok)` of `samples` labeled by `ok`.
pub fn fisher_discriminant(
    samples: &[Vec<f64>],
    ok: &[bool],
) -> Result<Discriminant, MonteCarloError> {
    let dim = samples.first().map_or(0, Vec::len);
    if samples.len() != ok.len() || samples.iter().any(|s| s.len() != dim) || dim == 0 {
        return Err(MonteCarloError::Dimension);
    }
    let mean = |want: bool| -> Option<DVector<f64>> {
        let mut m = DVector::zeros(dim);
        let mut n = 0usize;
        for (s, &o) in samples.iter().zip(ok) {
            if o == want {
                m += DVector::from_column_slice(s);
                n += 1;
            }
        }
        (n > 0).then(|| m / n as f64)
    };
    let (mu_ok, mu_fail) = match (mean(true), mean(false)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(MonteCarloError::OneClass),
    };
    let mut sw = DMatrix::zeros(dim, dim);
    for (s, &o) in samples.iter().zip(ok) {
        let d = DVector::from_column_slice(s) - if o { &mu_ok } else { &mu_fail };
        sw += &d * d.transpose();
    }
    let diff = &mu_fail - &mu_ok;
    let (w, regularized) = match sw.clone().cholesky() {
        Some(c) => (c.solve(&diff), false),
        None => {
            let ridged = sw + DMatrix::identity(dim, dim) * FISHER_RIDGE;
            let c = ridged.cholesky().ok_or(MonteCarloError::Singular)?;
            (c.solve(&diff), true)
        }
    };
    let norm = w.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(MonteCarloError::Singular);
    }
    let axis = w / norm;

    // Second coordinate: the basis vector least aligned with the axis,
    // made orthogonal to it.
    let k = (0..dim)
        .min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs()))
        .expect("dim > 0");
    let mut ortho = DVector::zeros(dim);
    ortho[k] = 1.0;
    ortho -= &axis * axis[k];
    let on = ortho.norm();
    if on > 0.0 {
        ortho /= on;
    }

    let threshold = 0.5 * (axis.dot(&mu_ok) + axis.dot(&mu_fail));
    let mut correct = 0usize;
    let projections = samples
        .iter()
        .zip(ok)
        .map(|(s, &o)| {
            let v = DVector::from_column_slice(s);
            let p = axis.dot(&v);
            if (p > threshold) != o {
                correct += 1;
            }
            [p, ortho.dot(&v)]
        })
        .collect();
    Ok(Discriminant {
        axis: axis.iter().copied().collect(),
        ortho: ortho.iter().copied().collect(),
        threshold,
        projections,
        separation: correct as f64 / samples.len() as f64,
        regularized,
    })
}

/// [`fisher_discriminant`] of trial outcomes.
pub fn fisher_axis(outcomes: &[TrialOutcome]) -> Result<Discriminant, MonteCarloError> {
    let samples: Vec<Vec<f64>> = outcomes.iter().map(|o| o.xi.xi.clone()).collect();
    let ok: Vec<bool> = outcomes.iter().map(|o| o.ok).collect();
    fisher_discriminant(&samples, &ok)
}

/// Cell constants ordered by decreasing `|axis|` component.
pub fn ranked_components(axis: &[f64]) -> Vec<(NeuronParam, f64)> {
    let mut v: Vec<(NeuronParam, f64)> = NeuronParam::ALL
        .into_iter()
        .zip(axis.iter().copied())
        .collect();
    v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    v
}
