//! Front end of the `spikelatch` binary: argument parsing, configuration
//! and the experiment commands. Every command is deterministic for a fixed
//! seed and configuration, whatever the worker count.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{Context, LatchArgs, MonteCarloArgs};
use config::RunConfig;
use spikelatch::cpg::LoopMode;
use spikelatch::montecarlo::Variant;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "SPIKELATCH_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    NotViable(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::NotViable(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spikelatch",
    version,
    about = "Spiking neural latch experiments"
)]
pub struct Cli {
    /// TOML run configuration; omitted fields take the nominal values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed of the random streams (overrides the config).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Open,
    Closed,
}

impl From<Mode> for LoopMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Open => LoopMode::Open,
            Mode::Closed => LoopMode::Closed,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Set and reset one latch; writes its state trace and spikes.
    SimulateLatch {
        /// Set pulse time (ms).
        #[arg(long)]
        set_at: Option<f64>,
        /// Reset pulse time (ms).
        #[arg(long)]
        reset_at: Option<f64>,
        /// Simulated time (ms).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Viable range of each latch parameter.
    ParamRanges {
        /// Relative resolution of the boundaries.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Failure rate of randomly perturbed latches.
    Montecarlo {
        /// one, both-identical or both-independent.
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        /// Number of trials.
        #[arg(short = 'n', long = "trials", value_parser = clap::value_parser!(u64).range(1..))]
        n: Option<u64>,
        /// Relative size of the deviation.
        #[arg(long)]
        fraction: Option<f64>,
        /// Also write the labeled deviation cloud.
        #[arg(long)]
        emit_cloud: bool,
    },
    /// Fisher projection of a cloud written by `montecarlo --emit-cloud`.
    Project {
        #[arg(long, value_name = "PATH")]
        cloud: PathBuf,
    },
    /// Four-module ring driving the actuator plant.
    Gait {
        #[arg(long, value_enum, default_value_t = Mode::Closed)]
        mode: Mode,
        /// Simulated time (ms).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Forward and reverse rings switched by a trigger stimulus.
    Reversal {
        /// Trigger stimulus time (ms).
        #[arg(long)]
        stimulus_at: Option<f64>,
        /// Simulated time (ms); default runs past the stimulus.
        #[arg(long)]
        duration: Option<f64>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool already built (by an earlier call in the same process) is kept.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Runs one invocation and returns the text for standard output.
pub fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    let ctx = Context { cfg, seed, out };
    match cli.command {
        Command::SimulateLatch {
            set_at,
            reset_at,
            duration,
        } => commands::simulate_latch(
            &ctx,
            LatchArgs {
                set_at,
                reset_at,
                duration,
            },
        ),
        Command::ParamRanges { tol } => commands::param_ranges_cmd(&ctx, tol),
        Command::Montecarlo {
            variant,
            n,
            fraction,
            emit_cloud,
        } => commands::montecarlo(
            &ctx,
            MonteCarloArgs {
                variant,
                trials: n,
                fraction,
                emit_cloud,
            },
        ),
        Command::Project { cloud } => commands::project(&ctx, &cloud),
        Command::Gait { mode, duration } => commands::gait(&ctx, mode.into(), duration),
        Command::Reversal {
            stimulus_at,
            duration,
        } => commands::reversal(&ctx, stimulus_at, duration),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_usage_error() {
        let err = Cli::try_parse_from(["spikelatch", "montecarlo", "-n", "0"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn variant_names_parse() {
        let cli =
            Cli::try_parse_from(["spikelatch", "montecarlo", "--variant", "both-independent"])
                .unwrap();
        match cli.command {
            Command::Montecarlo { variant, .. } => {
                assert_eq!(variant, Some(Variant::BothIndependent))
            }
            _ => unreachable!(),
        }
        assert!(Cli::try_parse_from(["spikelatch", "montecarlo", "--variant", "both"]).is_err());
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "spikelatch",
            "gait",
            "--mode",
            "open",
            "--seed",
            "7",
            "--out",
            "x",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(7));
        assert_eq!(cli.out, Some(PathBuf::from("x")));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 3);
        assert_eq!(CliError::NotViable("x".into()).exit_code(), 4);
    }
}
