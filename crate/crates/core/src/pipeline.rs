//! Per-tick counting with either the CSP alone or CSP followed by the HMM.

use std::fmt;
use std::str::FromStr;

use crate::csp::estimate_line;
use crate::env::{ActivationLine, EnvironmentModel};
use crate::hmm::Hmm;
use crate::infer::{make_observation, InferError, SlidingDecoder, WindowConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pipeline {
    Csp,
    CspHmm,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Csp => "csp",
            Pipeline::CspHmm => "csp+hmm",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csp" => Ok(Pipeline::Csp),
            "csp+hmm" => Ok(Pipeline::CspHmm),
            other => Err(format!(
                "unknown pipeline `{other}` (expected csp or csp+hmm)"
            )),
        }
    }
}

/// Online counter: feed one activation line, get that tick's count.
#[derive(Debug, Clone)]
pub struct Counter<'e> {
    env: &'e EnvironmentModel,
    decoder: Option<SlidingDecoder>,
}

impl<'e> Counter<'e> {
    pub fn csp(env: &'e EnvironmentModel) -> Self {
        Self { env, decoder: None }
    }

    pub fn csp_hmm(env: &'e EnvironmentModel, model: &Hmm, window: WindowConfig) -> Self {
        Self {
            env,
            decoder: Some(SlidingDecoder::new(model, window)),
        }
    }

    pub fn push(&mut self, line: &ActivationLine) -> Result<u32, InferError> {
        let est = estimate_line(self.env, line);
        match &mut self.decoder {
            None => Ok(est.delta),
            Some(dec) => dec.push(make_observation(&est, line, self.env)),
        }
    }
}

pub fn count_csp(env: &EnvironmentModel, lines: &[ActivationLine]) -> Vec<u32> {
    lines.iter().map(|l| estimate_line(env, l).delta).collect()
}

pub fn count_csp_hmm(
    env: &EnvironmentModel,
    model: &Hmm,
    window: WindowConfig,
    lines: &[ActivationLine],
) -> Result<Vec<u32>, InferError> {
    let mut c = Counter::csp_hmm(env, model, window);
    lines.iter().map(|l| c.push(l)).collect()
}

/// Counts for both pipelines from a single CSP pass.
pub fn count_both(
    env: &EnvironmentModel,
    model: &Hmm,
    window: WindowConfig,
    lines: &[ActivationLine],
) -> Result<(Vec<u32>, Vec<u32>), InferError> {
    let mut dec = SlidingDecoder::new(model, window);
    let mut csp = Vec::with_capacity(lines.len());
    let mut hmm = Vec::with_capacity(lines.len());
    for line in lines {
        let est = estimate_line(env, line);
        csp.push(est.delta);
        hmm.push(dec.push(make_observation(&est, line, env))?);
    }
    Ok((csp, hmm))
}
