//! Online person counting in sensorized homes from binary sensor
//! activations.
//!
//! Each tick's activation line is turned into a minimum person count by a
//! set-valued constraint problem ([`csp`]); a hidden Markov model ([`hmm`])
//! decoded over a sliding window ([`infer`]) then refines the sequence of
//! estimates. [`learn`] fits the model's six probabilities from labeled
//! data, [`sim`] produces such data from multi-agent random walks, and
//! [`eval`] with [`experiment`] score the two pipelines against each other.

pub mod csp;
pub mod env;
pub mod eval;
pub mod experiment;
pub mod hmm;
pub mod infer;
pub mod learn;
pub mod pipeline;
pub mod sim;

use thiserror::Error;

pub use csp::{
    brute_force_estimate, build_instance, check_assignment, estimate_count, CspEstimate,
};
pub use env::{parse_activation_lines, parse_environment, ActivationLine, EnvironmentModel};
pub use hmm::{Hmm, HmmObservation, HmmParams, HmmState};
pub use infer::{sliding_window_decode, viterbi, WindowConfig};
pub use pipeline::Pipeline;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Env(#[from] env::EnvError),
    #[error("{path}: {source}")]
    Config { path: String, source: env::EnvError },
    #[error(transparent)]
    Csp(#[from] csp::CspError),
    #[error(transparent)]
    Hmm(#[from] hmm::HmmError),
    #[error(transparent)]
    Infer(#[from] infer::InferError),
    #[error(transparent)]
    Learn(#[from] learn::LearnError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable category, printed by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Env(_) | Error::Config { .. } => "env",
            Error::Csp(_) => "csp",
            Error::Hmm(_) => "params",
            Error::Infer(_) => "decode",
            Error::Learn(_) => "learn",
            Error::Sim(_) => "sim",
            Error::Eval(_) => "eval",
            Error::Io { .. } => "io",
            Error::Csv(_) => "io",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
