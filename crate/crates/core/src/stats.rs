//! Normalization, weighting distribution, moments and Mandel Q of a GHA
//! coherent state, computed from the log-domain series under a truncation
//! policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{LogSumExp, PotentialParams, TermStream};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-16;
pub const DEFAULT_QUIET_RUN: u64 = 10;
pub const DEFAULT_HARD_CAP: u64 = 1_000_000;

/// Rounding noise allowed below zero before a variance is treated as a bug.
pub const VARIANCE_FLOOR: f64 = -1e-9;

/// Where the series `Σ_n n^m |z|^{2n}/g(n,k)` is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// Sum `n = 0..=n_max`.
    Fixed { n_max: u64 },
    /// Stop once `quiet_run` consecutive terms of the `m = 2` sum each
    /// contribute less than `tail_tolerance` of its running total.
    Adaptive {
        tail_tolerance: f64,
        quiet_run: u64,
        hard_cap: u64,
    },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::adaptive()
    }
}

impl TruncationPolicy {
    pub fn fixed(n_max: u64) -> Self {
        Self::Fixed { n_max }
    }

    pub fn adaptive() -> Self {
        Self::Adaptive {
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            quiet_run: DEFAULT_QUIET_RUN,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }

    pub fn adaptive_with_tolerance(tail_tolerance: f64) -> Self {
        Self::Adaptive {
            tail_tolerance,
            quiet_run: DEFAULT_QUIET_RUN,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Self::Adaptive { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed { n_max } if n_max < 1 => Err(Error::InvalidPolicy(
                "fixed cutoff n_max must be at least 1".into(),
            )),
            Self::Fixed { .. } => Ok(()),
            Self::Adaptive {
                tail_tolerance,
                quiet_run,
                hard_cap,
            } => {
                if !(tail_tolerance > 0.0 && tail_tolerance < 1.0) {
                    return Err(Error::InvalidPolicy(format!(
                        "tail tolerance {tail_tolerance} outside (0, 1)"
                    )));
                }
                if quiet_run < 1 {
                    return Err(Error::InvalidPolicy("quiet run must be at least 1".into()));
                }
                if hard_cap < quiet_run {
                    return Err(Error::InvalidPolicy(format!(
                        "hard cap {hard_cap} below quiet run {quiet_run}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `ln S_m` with `S_m = Σ_{n=0}^{terms_used} n^m |z|^{2n}/g(n,k)`, `m = 0, 1, 2`.
///
/// `S_1` and `S_2` are `-∞` when only `n = 0` contributes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSeriesSums {
    pub log_s0: f64,
    pub log_s1: f64,
    pub log_s2: f64,
    /// Highest index included in the sums.
    pub terms_used: u64,
    pub converged: bool,
    /// First index of the quiet run that ended an adaptive summation.
    pub estimated_threshold: Option<u64>,
}

/// Accumulates the three moment sums over a single pass of the term stream.
pub fn accumulate_sums(
    abs_z: f64,
    params: &PotentialParams,
    policy: &TruncationPolicy,
) -> Result<LogSeriesSums> {
    policy.validate()?;
    validate_amplitude(abs_z)?;
    if abs_z == 0.0 {
        return Ok(LogSeriesSums {
            log_s0: 0.0,
            log_s1: f64::NEG_INFINITY,
            log_s2: f64::NEG_INFINITY,
            terms_used: 0,
            converged: true,
            estimated_threshold: Some(0),
        });
    }

    let mut sums = MomentSums::default();

    let terms = TermStream::new(abs_z, *params)?;
    let (terms_used, converged, estimated_threshold) = match *policy {
        TruncationPolicy::Fixed { n_max } => {
            for (n, log_t) in terms.take((n_max as usize).saturating_add(1)) {
                sums.push(n, log_t);
            }
            (n_max, false, None)
        }
        TruncationPolicy::Adaptive {
            tail_tolerance,
            quiet_run,
            hard_cap,
        } => {
            let log_tol = tail_tolerance.ln();
            let mut run = 0u64;
            let mut run_start = 0u64;
            let mut outcome = (hard_cap, false, None);
            for (n, log_t) in terms.take((hard_cap as usize).saturating_add(1)) {
                let log_t2 = sums.push(n, log_t);
                // A zero term (n = 0 in the m = 2 sum) counts as insignificant.
                let partial = sums.s2.value().unwrap_or(f64::NEG_INFINITY);
                let quiet = log_t2 == f64::NEG_INFINITY || log_t2 - partial < log_tol;
                if quiet {
                    if run == 0 {
                        run_start = n;
                    }
                    run += 1;
                    if run >= quiet_run {
                        outcome = (n, true, Some(run_start));
                        break;
                    }
                } else {
                    run = 0;
                }
            }
            outcome
        }
    };

    Ok(LogSeriesSums {
        log_s0: sums.s0.value().expect("n = 0 term always pushed"),
        log_s1: sums.s1.value().expect("n = 0 term always pushed"),
        log_s2: sums.s2.value().expect("n = 0 term always pushed"),
        terms_used,
        converged,
        estimated_threshold,
    })
}

#[derive(Default)]
struct MomentSums {
    s0: LogSumExp,
    s1: LogSumExp,
    s2: LogSumExp,
}

impl MomentSums {
    /// Adds term `n` to all three sums and returns its log contribution to `S_2`.
    fn push(&mut self, n: u64, log_t: f64) -> f64 {
        self.s0.push(log_t);
        if n == 0 {
            self.s1.push(f64::NEG_INFINITY);
            self.s2.push(f64::NEG_INFINITY);
            return f64::NEG_INFINITY;
        }
        let log_n = (n as f64).ln();
        self.s1.push(log_t + log_n);
        let log_t2 = log_t + 2.0 * log_n;
        self.s2.push(log_t2);
        log_t2
    }
}

/// Mean, variance, Mandel Q and normalization of `|z, k⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub mean: f64,
    pub variance: f64,
    /// `σ²/⟨N⟩ − 1`; `None` when the mean vanishes (|z| = 0), where it is 0/0.
    pub mandel_q: Option<f64>,
    /// `N(|z|, k) = S_0^{-1/2}`. Underflows to zero for large |z|; see `log_normalization`.
    pub normalization: f64,
    pub log_normalization: f64,
    pub sums: LogSeriesSums,
}

impl StateStats {
    pub fn from_sums(sums: LogSeriesSums) -> Result<Self> {
        let mean = (sums.log_s1 - sums.log_s0).exp();
        let second = (sums.log_s2 - sums.log_s0).exp();
        let mut variance = second - mean * mean;
        if variance < 0.0 {
            if variance < VARIANCE_FLOOR {
                return Err(Error::NegativeVariance { variance });
            }
            variance = 0.0;
        }
        let mandel_q = (mean > 0.0).then(|| variance / mean - 1.0);
        let log_normalization = -0.5 * sums.log_s0;
        Ok(Self {
            mean,
            variance,
            mandel_q,
            normalization: log_normalization.exp(),
            log_normalization,
            sums,
        })
    }

    pub fn converged(&self) -> bool {
        self.sums.converged
    }
}

pub fn state_stats(
    abs_z: f64,
    params: &PotentialParams,
    policy: &TruncationPolicy,
) -> Result<StateStats> {
    StateStats::from_sums(accumulate_sums(abs_z, params, policy)?)
}

/// Normalized weights `P_n = N² |z|^{2n}/g(n,k)` for `n = 0..=support_bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub log_weights: Vec<f64>,
    pub support_bound: u64,
    pub converged: bool,
}

impl WeightDistribution {
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_weights.iter().map(|lw| lw.exp())
    }

    pub fn probability(&self, n: u64) -> f64 {
        self.log_weights.get(n as usize).map_or(0.0, |lw| lw.exp())
    }

    pub fn total(&self) -> f64 {
        self.probabilities().sum()
    }
}

pub fn weight_distribution(
    abs_z: f64,
    params: &PotentialParams,
    policy: &TruncationPolicy,
) -> Result<WeightDistribution> {
    let sums = accumulate_sums(abs_z, params, policy)?;
    let log_weights = if abs_z == 0.0 {
        vec![0.0]
    } else {
        TermStream::new(abs_z, *params)?
            .take(sums.terms_used as usize + 1)
            .map(|(_, log_t)| log_t - sums.log_s0)
            .collect()
    };
    Ok(WeightDistribution {
        log_weights,
        support_bound: sums.terms_used,
        converged: sums.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonStatistics {
    Poissonian,
    SuperPoissonian,
    SubPoissonian,
    Undefined,
}

impl std::fmt::Display for PhotonStatistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Poissonian => "poissonian",
            Self::SuperPoissonian => "super-poissonian",
            Self::SubPoissonian => "sub-poissonian",
            Self::Undefined => "undefined",
        })
    }
}

pub fn classify(stats: &StateStats, tol: f64) -> PhotonStatistics {
    classify_q(stats.mandel_q, tol)
}

pub fn classify_q(q: Option<f64>, tol: f64) -> PhotonStatistics {
    match q {
        None => PhotonStatistics::Undefined,
        Some(q) if q > tol => PhotonStatistics::SuperPoissonian,
        Some(q) if q < -tol => PhotonStatistics::SubPoissonian,
        Some(_) => PhotonStatistics::Poissonian,
    }
}

fn validate_amplitude(abs_z: f64) -> Result<()> {
    if abs_z.is_finite() && abs_z >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "abs_z",
            value: abs_z,
            reason: "amplitude must be finite and nonnegative",
        })
    }
}
