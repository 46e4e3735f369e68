//! Extended-precision direct summation, used as an independent reference.
//!
//! Works with `|z|^{2n}` and `g(n, k)` as plain big floats (no logarithms, no
//! recurrences shared with the library) at 256 bits, about 77 decimal digits.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct OracleSums {
    pub s0: BigFloat,
    pub s1: BigFloat,
    pub s2: BigFloat,
    pub terms: Vec<BigFloat>,
    cc: Consts,
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION)
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    x.format(Radix::Dec, RM, cc)
        .expect("formattable")
        .parse()
        .expect("decimal float")
}

/// `(j + γ/4)^α − (γ/4)^α` for `j = 1..=n_max`, with α = 2k/(k+2) formed in big precision.
pub fn factors(k: f64, gamma: f64, n_max: u64, cc: &mut Consts) -> Vec<BigFloat> {
    let two = big(2.0);
    let kb = big(k);
    let alpha = two
        .mul(&kb, PRECISION, RM)
        .div(&kb.add(&two, PRECISION, RM), PRECISION, RM);
    let offset = big(gamma).div(&big(4.0), PRECISION, RM);
    let offset_pow = offset.pow(&alpha, PRECISION, RM, cc);
    (1..=n_max)
        .map(|j| {
            let base = BigFloat::from_u64(j, PRECISION).add(&offset, PRECISION, RM);
            base.pow(&alpha, PRECISION, RM, cc)
                .sub(&offset_pow, PRECISION, RM)
        })
        .collect()
}

/// `S_m = Σ_{n=0}^{n_max} n^m |z|^{2n} / g(n,k)` by direct summation.
pub fn direct_sums(abs_z: f64, k: f64, gamma: f64, n_max: u64) -> OracleSums {
    let mut cc = Consts::new().expect("constants cache");
    let z2 = big(abs_z).mul(&big(abs_z), PRECISION, RM);
    let factors = factors(k, gamma, n_max, &mut cc);
    let mut power = big(1.0);
    let mut g = big(1.0);
    let mut s0 = big(0.0);
    let mut s1 = big(0.0);
    let mut s2 = big(0.0);
    let mut terms = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        if n > 0 {
            power = power.mul(&z2, PRECISION, RM);
            g = g.mul(&factors[n as usize - 1], PRECISION, RM);
        }
        let term = power.div(&g, PRECISION, RM);
        let nb = BigFloat::from_u64(n, PRECISION);
        let t1 = term.mul(&nb, PRECISION, RM);
        let t2 = t1.mul(&nb, PRECISION, RM);
        s0 = s0.add(&term, PRECISION, RM);
        s1 = s1.add(&t1, PRECISION, RM);
        s2 = s2.add(&t2, PRECISION, RM);
        terms.push(term);
    }
    OracleSums {
        s0,
        s1,
        s2,
        terms,
        cc,
    }
}

impl OracleSums {
    pub fn ln(&mut self, x: &BigFloat) -> f64 {
        let l = x.ln(PRECISION, RM, &mut self.cc);
        to_f64(&l, &mut self.cc)
    }

    pub fn log_s0(&mut self) -> f64 {
        let s = self.s0.clone();
        self.ln(&s)
    }

    pub fn log_s1(&mut self) -> f64 {
        let s = self.s1.clone();
        self.ln(&s)
    }

    pub fn log_s2(&mut self) -> f64 {
        let s = self.s2.clone();
        self.ln(&s)
    }

    /// (mean, variance, Q) evaluated in big precision.
    pub fn moments(&mut self) -> (f64, f64, f64) {
        let mean = self.s1.div(&self.s0, PRECISION, RM);
        let second = self.s2.div(&self.s0, PRECISION, RM);
        let var = second.sub(&mean.mul(&mean, PRECISION, RM), PRECISION, RM);
        let q = var.div(&mean, PRECISION, RM).sub(&big(1.0), PRECISION, RM);
        (
            to_f64(&mean, &mut self.cc),
            to_f64(&var, &mut self.cc),
            to_f64(&q, &mut self.cc),
        )
    }

    /// `P_n = term_n / S_0`.
    pub fn weight(&mut self, n: usize) -> f64 {
        let w = self.terms[n].div(&self.s0, PRECISION, RM);
        to_f64(&w, &mut self.cc)
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|j| (j as f64).ln()).sum()
}

/// Poisson(λ) weight computed as `exp(n ln λ − λ − ln n!)`.
pub fn poisson_weight(lambda: f64, n: u64) -> f64 {
    if n == 0 {
        return (-lambda).exp();
    }
    (n as f64 * lambda.ln() - lambda - ln_factorial(n)).exp()
}
