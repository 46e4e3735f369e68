//! Adaptive vs fixed-cutoff comparisons: threshold estimation, multi-cutoff
//! sweeps, and detection of the spurious `Q → −1` collapse that early
//! truncation produces.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PotentialParams;
use crate::stats::{
    state_stats, StateStats, TruncationPolicy, DEFAULT_HARD_CAP, DEFAULT_QUIET_RUN,
};

/// Default `|z|` grid and cutoff family of the multi-cutoff sweep.
pub const DEFAULT_SWEEP_Z_MIN: f64 = 0.1;
pub const DEFAULT_SWEEP_Z_MAX: f64 = 15.0;
pub const DEFAULT_SWEEP_Z_STEP: f64 = 0.1;
pub const DEFAULT_SWEEP_CUTOFFS: [u64; 4] = [50, 100, 200, 300];

/// Default Q gap that counts as a collapse rather than rounding.
pub const DEFAULT_COLLAPSE_DROP: f64 = 0.5;

/// The amplitudes and cutoffs of Table-1 style reports.
pub const TABLE_Z_VALUES: [f64; 6] = [2.5, 5.0, 7.5, 10.0, 12.5, 15.0];
pub const TABLE_FIXED_CUTOFF: u64 = 150;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub k: f64,
    pub gamma: f64,
    pub z_grid: Vec<f64>,
    /// Fixed-mode cutoffs; the adaptive reference is always computed.
    pub cutoffs: Vec<u64>,
}

impl SweepSpec {
    pub fn new(k: f64, gamma: f64, z_grid: Vec<f64>, cutoffs: Vec<u64>) -> Result<Self> {
        let spec = Self {
            k,
            gamma,
            z_grid,
            cutoffs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn params(&self) -> Result<PotentialParams> {
        PotentialParams::new(self.k, self.gamma)
    }

    /// An empty cutoff list is accepted and yields an adaptive-only sweep.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.z_grid.is_empty() {
            return Err(Error::InvalidSweep("|z| grid is empty".into()));
        }
        if let Some(z) = self.z_grid.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
            return Err(Error::InvalidSweep(format!(
                "|z| = {z} is not a nonnegative amplitude"
            )));
        }
        if self.z_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSweep(
                "|z| grid must be strictly increasing".into(),
            ));
        }
        if self.cutoffs.contains(&0) {
            return Err(Error::InvalidSweep("cutoffs must be positive".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSweep(
                "cutoffs must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// `min, min + step, …` up to `max` inclusive, each point snapped to 12
/// decimals so that grids like `0.1..15` print cleanly.
pub fn z_range(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min >= 0.0 && max >= min) {
        return Err(Error::InvalidSweep(format!(
            "invalid |z| range [{min}, {max}]"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidSweep(format!("invalid |z| step {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as u64;
    Ok((0..=count)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The adaptive reference hit its hard cap; its numbers are a truncated lower bound.
    NotConverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub abs_z: f64,
    pub status: RowStatus,
    /// Absent only when the row failed outright.
    pub adaptive: Option<StateStats>,
    pub fixed: BTreeMap<u64, StateStats>,
    pub threshold_estimate: Option<u64>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn q_adaptive(&self) -> Option<f64> {
        self.adaptive.and_then(|s| s.mandel_q)
    }

    pub fn q_fixed(&self, n_max: u64) -> Option<f64> {
        self.fixed.get(&n_max).and_then(|s| s.mandel_q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub k: f64,
    pub gamma: f64,
    pub policy: TruncationPolicy,
    pub cutoffs: Vec<u64>,
    pub rows: Vec<ReportRow>,
}

/// First index of the quiet run that ends an adaptive summation at `abs_z`.
pub fn estimate_threshold(
    abs_z: f64,
    params: &PotentialParams,
    tail_tolerance: f64,
) -> Result<u64> {
    let policy = TruncationPolicy::Adaptive {
        tail_tolerance,
        quiet_run: DEFAULT_QUIET_RUN,
        hard_cap: DEFAULT_HARD_CAP,
    };
    estimate_threshold_with(abs_z, params, &policy)
}

pub fn estimate_threshold_with(
    abs_z: f64,
    params: &PotentialParams,
    policy: &TruncationPolicy,
) -> Result<u64> {
    let TruncationPolicy::Adaptive { hard_cap, .. } = *policy else {
        return Err(Error::InvalidPolicy(
            "threshold estimation needs an adaptive policy".into(),
        ));
    };
    let sums = crate::stats::accumulate_sums(abs_z, params, policy)?;
    match sums.estimated_threshold {
        Some(n) if sums.converged => Ok(n),
        _ => Err(Error::NotConverged { hard_cap }),
    }
}

/// Adaptive reference plus every fixed cutoff at each `|z|` of the grid.
///
/// Rows are computed in parallel and returned in grid order. `policy` must be
/// adaptive; it sets the reference computation.
pub fn run_sweep(spec: &SweepSpec, policy: &TruncationPolicy) -> Result<TruncationReport> {
    spec.validate()?;
    policy.validate()?;
    if !policy.is_adaptive() {
        return Err(Error::InvalidPolicy(
            "sweep reference needs an adaptive policy".into(),
        ));
    }
    let params = spec.params()?;
    let rows = spec
        .z_grid
        .par_iter()
        .map(|&abs_z| sweep_row(abs_z, &params, policy, &spec.cutoffs))
        .collect();
    Ok(TruncationReport {
        k: spec.k,
        gamma: spec.gamma,
        policy: *policy,
        cutoffs: spec.cutoffs.clone(),
        rows,
    })
}

fn sweep_row(
    abs_z: f64,
    params: &PotentialParams,
    policy: &TruncationPolicy,
    cutoffs: &[u64],
) -> ReportRow {
    let failed = |e: Error| ReportRow {
        abs_z,
        status: RowStatus::Failed,
        adaptive: None,
        fixed: BTreeMap::new(),
        threshold_estimate: None,
        error: Some(e.to_string()),
    };
    let adaptive = match state_stats(abs_z, params, policy) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let mut fixed = BTreeMap::new();
    for &n_max in cutoffs {
        match state_stats(abs_z, params, &TruncationPolicy::fixed(n_max)) {
            Ok(s) => {
                fixed.insert(n_max, s);
            }
            Err(e) => return failed(e),
        }
    }
    let status = if adaptive.converged() {
        RowStatus::Ok
    } else {
        RowStatus::NotConverged
    };
    ReportRow {
        abs_z,
        status,
        adaptive: Some(adaptive),
        fixed,
        threshold_estimate: adaptive.sums.estimated_threshold,
        error: None,
    }
}

/// Smallest grid `|z|` where the `n_max` curve sits more than `drop` below the
/// adaptive curve. Rows without a defined Q on both curves are skipped.
pub fn collapse_onset(report: &TruncationReport, n_max: u64, drop: f64) -> Result<Option<f64>> {
    if !report.cutoffs.contains(&n_max) {
        return Err(Error::UnknownCutoff(n_max));
    }
    Ok(report
        .rows
        .iter()
        .find(|row| match (row.q_fixed(n_max), row.q_adaptive()) {
            (Some(fixed), Some(adaptive)) => fixed < adaptive - drop,
            _ => false,
        })
        .map(|row| row.abs_z))
}
