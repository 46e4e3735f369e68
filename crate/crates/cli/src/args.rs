use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghacs_core::lab::{
    DEFAULT_SWEEP_Z_MAX, DEFAULT_SWEEP_Z_MIN, DEFAULT_SWEEP_Z_STEP, TABLE_FIXED_CUTOFF,
};
use ghacs_core::stats::{DEFAULT_HARD_CAP, DEFAULT_QUIET_RUN, DEFAULT_TAIL_TOLERANCE};
use ghacs_core::{Error, TruncationPolicy, DEFAULT_GAMMA};

/// Photon-number statistics of generalized Heisenberg algebra coherent states
/// for power-law potentials.
///
/// Exit status: 0 on success, 2 on invalid arguments, 3 when an adaptive
/// summation hits its hard cap without converging.
#[derive(Debug, Parser)]
#[command(name = "ghacs", version, args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean, variance, Mandel Q and normalization at one amplitude.
    ///
    /// CSV columns: k,gamma,abs_z,mode,n_max,tail_tol,quiet_run,hard_cap,
    /// mean,variance,mandel_q,statistics,normalization,log_normalization,
    /// terms_used,converged,threshold
    Stats(StatsArgs),
    /// Adaptive vs fixed-cutoff moments over a list of amplitudes.
    ///
    /// CSV columns: k,gamma,abs_z,adaptive_mean,adaptive_variance,adaptive_q,
    /// fixed_n_max,fixed_mean,fixed_variance,fixed_q,threshold,n_max_used,converged
    Table(TableArgs),
    /// Q versus |z| for the adaptive reference and a family of fixed cutoffs.
    ///
    /// CSV columns: k,gamma,abs_z,curve,n_max,mandel_q,mean,variance,
    /// terms_used,status
    Sweep(SweepArgs),
    /// Weighting distribution P_n up to the truncation index.
    ///
    /// CSV columns: n,p_n, followed by labelled footer rows (sum, mean,
    /// variance, mandel_q, terms_used, converged, k, gamma, abs_z).
    Dist(DistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct PhysicsArgs {
    /// Power-law exponent k (> 0).
    #[arg(long)]
    pub k: f64,
    /// Spectral offset γ (> 0), entering the structure function as γ/4.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct AdaptiveArgs {
    /// Relative tail significance for adaptive truncation.
    #[arg(long, default_value_t = DEFAULT_TAIL_TOLERANCE)]
    pub tail_tol: f64,
    /// Consecutive insignificant terms required to stop.
    #[arg(long, default_value_t = DEFAULT_QUIET_RUN)]
    pub quiet_run: u64,
    /// Maximum term index for adaptive truncation.
    #[arg(long, default_value_t = DEFAULT_HARD_CAP)]
    pub hard_cap: u64,
}

impl AdaptiveArgs {
    pub fn policy(&self) -> TruncationPolicy {
        TruncationPolicy::Adaptive {
            tail_tolerance: self.tail_tol,
            quiet_run: self.quiet_run,
            hard_cap: self.hard_cap,
        }
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Truncate adaptively (the default).
    #[arg(long, conflicts_with = "fixed_nmax")]
    pub adaptive: bool,
    /// Truncate at a fixed index n_max (inclusive).
    #[arg(long)]
    pub fixed_nmax: Option<u64>,
    #[command(flatten)]
    pub adaptive_args: AdaptiveArgs,
}

impl PolicyArgs {
    pub fn policy(&self) -> TruncationPolicy {
        match self.fixed_nmax {
            Some(n_max) => TruncationPolicy::fixed(n_max),
            None => self.adaptive_args.policy(),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StatsArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Amplitude |z| (>= 0).
    #[arg(long)]
    pub z: f64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TableArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Comma-separated amplitudes.
    #[arg(long, value_delimiter = ',', default_values_t = ghacs_core::lab::TABLE_Z_VALUES)]
    pub z: Vec<f64>,
    /// Cutoff of the fixed-truncation column.
    #[arg(long, default_value_t = TABLE_FIXED_CUTOFF)]
    pub fixed_nmax: u64,
    #[command(flatten)]
    pub adaptive_args: AdaptiveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, default_value_t = DEFAULT_SWEEP_Z_MIN)]
    pub z_min: f64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_Z_MAX)]
    pub z_max: f64,
    #[arg(long, default_value_t = DEFAULT_SWEEP_Z_STEP)]
    pub z_step: f64,
    /// Comma-separated fixed cutoffs; an empty string gives the adaptive curve only.
    #[arg(long, default_value = "50,100,200,300", value_parser = parse_cutoffs)]
    pub cutoffs: Cutoffs,
    #[command(flatten)]
    pub adaptive_args: AdaptiveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DistArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long)]
    pub z: f64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutoffs(pub Vec<u64>);

fn parse_cutoffs(s: &str) -> Result<Cutoffs, String> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("none") {
        return Ok(Cutoffs(Vec::new()));
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| format!("invalid cutoff {part:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Cutoffs)
}

/// Errors that come from bad user input rather than from the computation.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter { .. }
            | Error::InvalidPolicy(_)
            | Error::InvalidSweep(_)
            | Error::UnknownCutoff(_)
    )
}
