//! Log-domain evaluation of the structure function `g(n, k)` and the series
//! terms `|z|^{2n} / g(n, k)`.
//!
//! Nothing in this module ever forms `|z|^{2n}` or `g(n, k)` directly: at
//! `|z| = 15` and `n = 700` the numerator alone is around `10^{1646}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectral offset used when none is given. Enters the structure function as `γ/4 = 1/2`.
pub const DEFAULT_GAMMA: f64 = 2.0;

/// Below this value of `(γ/4)^α / (j + γ/4)^α` the increment switches to the
/// large-`j` expansion.
const NEGLIGIBLE_OFFSET_RATIO: f64 = 1e-17;

/// Physics inputs of a power-law potential: exponent `k` and spectral offset `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    k: f64,
    gamma: f64,
}

impl PotentialParams {
    pub fn new(k: f64, gamma: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter {
                name: "k",
                value: k,
                reason: "power-law exponent must be finite and positive",
            });
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "spectral offset must be finite and positive",
            });
        }
        Ok(Self { k, gamma })
    }

    /// Parameters with the default spectral offset.
    pub fn with_default_gamma(k: f64) -> Result<Self> {
        Self::new(k, DEFAULT_GAMMA)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `γ/4`, the additive offset inside each factor of `g(n, k)`.
    pub fn offset(&self) -> f64 {
        self.gamma / 4.0
    }

    /// `α = 2k/(k+2)`, always in `(0, 2)`.
    pub fn alpha(&self) -> f64 {
        characteristic_exponent(self)
    }
}

/// The exponent `α = 2k/(k+2)` of the power-law spectrum.
pub fn characteristic_exponent(params: &PotentialParams) -> f64 {
    let k = params.k;
    // 2 / (1 + 2/k) stays accurate as k grows without bound.
    2.0 / (1.0 + 2.0 / k)
}

/// `ln[(j + γ/4)^α − (γ/4)^α]`, the logarithm of the `j`-th factor of `g(n, k)`.
///
/// Written as `α ln(j + γ/4) + ln(1 − r)` with `r = (γ/4 / (j + γ/4))^α`, which
/// keeps full relative precision even when `α` is small and the two powers
/// nearly cancel.
///
/// # Panics
///
/// If `j == 0`; the factor vanishes there and `g(0, k)` is the empty product.
pub fn log_g_increment(j: u64, params: &PotentialParams) -> f64 {
    assert!(j >= 1, "structure-function factors start at j = 1");
    let alpha = params.alpha();
    let offset = params.offset();
    let base = j as f64 + offset;
    let log_base = base.ln();
    let log_ratio = alpha * (offset.ln() - log_base);
    let ratio = log_ratio.exp();
    if ratio < NEGLIGIBLE_OFFSET_RATIO {
        alpha * log_base + (-ratio).ln_1p()
    } else {
        alpha * log_base + (-log_ratio.exp_m1()).ln()
    }
}

/// `ln g(n, k)`, summed from scratch with compensated accumulation.
pub fn log_g(n: u64, params: &PotentialParams) -> f64 {
    let mut acc = NeumaierSum::default();
    for j in 1..=n {
        acc += log_g_increment(j, params);
    }
    acc.value()
}

/// `ln(|z|^{2n} / g(n, k)) = 2n ln|z| − ln g(n, k)`.
///
/// `|z| = 0` is only meaningful for `n = 0`; every higher term is exactly zero
/// and has no finite logarithm, so it is reported as [`Error::DegenerateAmplitude`].
pub fn log_term(n: u64, log_abs_z: f64, params: &PotentialParams) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if log_abs_z == f64::NEG_INFINITY {
        return Err(Error::DegenerateAmplitude { n });
    }
    Ok(2.0 * n as f64 * log_abs_z - log_g(n, params))
}

/// `ln Σ exp(x_i)` over a stream, see [`LogSumExp`].
pub fn log_sum_exp<I>(values: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut acc = LogSumExp::new();
    for x in values {
        acc.push(x);
    }
    acc.value().ok_or(Error::EmptyInput)
}

/// Kahan–Babuška–Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }
}

impl std::ops::AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }
}

/// Streaming log-sum-exp with a running maximum.
///
/// Holds `Σ exp(x_i − max)` in a compensated sum; when a new maximum arrives
/// the accumulated sum is rescaled down, so no intermediate ever exceeds the
/// number of pushed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    max: f64,
    scaled: NeumaierSum,
    count: u64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: NeumaierSum::default(),
            count: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled.scale((self.max - x).exp());
            self.max = x;
        }
        self.scaled += (x - self.max).exp();
    }

    /// `None` until at least one value has been pushed. All-`-∞` input gives `-∞`.
    pub fn value(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        if self.max == f64::NEG_INFINITY {
            return Some(f64::NEG_INFINITY);
        }
        Some(self.max + self.scaled.value().ln())
    }
}

/// Lazily generated `(n, ln term_n)` pairs for a fixed `|z| > 0`.
///
/// Uses the recurrence `ln t_n = ln t_{n−1} + 2 ln|z| − ln[(n+γ/4)^α − (γ/4)^α]`
/// with compensated accumulation.
#[derive(Debug, Clone)]
pub struct TermStream {
    params: PotentialParams,
    log_z2: f64,
    next: u64,
    log_term: NeumaierSum,
}

impl TermStream {
    pub fn new(abs_z: f64, params: PotentialParams) -> Result<Self> {
        let log_z2 = 2.0 * positive_log(abs_z)?;
        Ok(Self {
            params,
            log_z2,
            next: 0,
            log_term: NeumaierSum::default(),
        })
    }
}

impl Iterator for TermStream {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        if n > 0 {
            self.log_term += self.log_z2 - log_g_increment(n, &self.params);
        }
        self.next += 1;
        Some((n, self.log_term.value()))
    }
}

/// Growable cache of `ln g(n, k)` for one `|z|`.
///
/// Extension needs `&mut self`; a frozen sequence can be shared freely.
#[derive(Debug, Clone)]
pub struct LogTermSequence {
    params: PotentialParams,
    log_z2: f64,
    cumulative_log_g: Vec<f64>,
    log_g_acc: NeumaierSum,
    log_terms: Vec<f64>,
    term_acc: NeumaierSum,
}

impl LogTermSequence {
    pub fn new(abs_z: f64, params: PotentialParams) -> Result<Self> {
        let log_z2 = 2.0 * positive_log(abs_z)?;
        Ok(Self {
            params,
            log_z2,
            cumulative_log_g: vec![0.0],
            log_g_acc: NeumaierSum::default(),
            log_terms: vec![0.0],
            term_acc: NeumaierSum::default(),
        })
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    /// `2 ln|z|`.
    pub fn log_z2(&self) -> f64 {
        self.log_z2
    }

    /// Highest index currently cached.
    pub fn last_index(&self) -> u64 {
        (self.cumulative_log_g.len() - 1) as u64
    }

    pub fn extend_to(&mut self, n: u64) {
        while self.last_index() < n {
            let j = self.last_index() + 1;
            let inc = log_g_increment(j, &self.params);
            self.log_g_acc += inc;
            self.term_acc += self.log_z2 - inc;
            self.cumulative_log_g.push(self.log_g_acc.value());
            self.log_terms.push(self.term_acc.value());
        }
    }

    pub fn log_g(&mut self, n: u64) -> f64 {
        self.extend_to(n);
        self.cumulative_log_g[n as usize]
    }

    pub fn log_term(&mut self, n: u64) -> f64 {
        self.extend_to(n);
        self.log_terms[n as usize]
    }

    pub fn cumulative_log_g(&self) -> &[f64] {
        &self.cumulative_log_g
    }

    pub fn log_terms(&self) -> &[f64] {
        &self.log_terms
    }
}

fn positive_log(abs_z: f64) -> Result<f64> {
    if !(abs_z.is_finite() && abs_z > 0.0) {
        return Err(Error::InvalidParameter {
            name: "abs_z",
            value: abs_z,
            reason: "term sequences need a finite, strictly positive amplitude",
        });
    }
    Ok(abs_z.ln())
}
