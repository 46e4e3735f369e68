use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("log-sum-exp of an empty sequence")]
    EmptyInput,

    #[error("|z| = 0 has no finite log-term for n = {n}")]
    DegenerateAmplitude { n: u64 },

    #[error("series did not converge within hard cap of {hard_cap} terms")]
    NotConverged { hard_cap: u64 },

    #[error("negative variance {variance:e} beyond rounding floor")]
    NegativeVariance { variance: f64 },

    #[error("cutoff n_max = {0} is not part of the report")]
    UnknownCutoff(u64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
