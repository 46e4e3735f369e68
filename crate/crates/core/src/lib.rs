//! Photon-number statistics of generalized Heisenberg algebra coherent states
//! for power-law potentials.
//!
//! The state `|z, k⟩` is represented only through its number-state weights
//! `P_n ∝ |z|^{2n} / g(n, k)`. All series are evaluated in the log domain, so
//! amplitudes and cutoffs far beyond the native float range are safe.

pub mod error;
pub mod lab;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
pub use lab::{
    collapse_onset, estimate_threshold, estimate_threshold_with, run_sweep, z_range, ReportRow,
    RowStatus, SweepSpec, TruncationReport,
};
pub use series::{
    characteristic_exponent, log_g, log_g_increment, log_sum_exp, log_term, LogSumExp,
    LogTermSequence, NeumaierSum, PotentialParams, TermStream, DEFAULT_GAMMA,
};
pub use stats::{
    accumulate_sums, classify, classify_q, state_stats, weight_distribution, LogSeriesSums,
    PhotonStatistics, StateStats, TruncationPolicy, WeightDistribution,
};
