//! Frequency-count learning of [`HmmParams`] from labeled sequences.

use thiserror::Error;

use crate::csp::estimate_line;
use crate::env::{ActivationLine, EnvironmentModel};
use crate::hmm::{
    classify_emission, classify_transition, EmissionClass, HmmObservation, HmmParams, HmmState,
    TransitionClass,
};
use crate::infer::make_observation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("tick {0} has no ground-truth label")]
    Unlabeled(usize),
    #[error("tick {tick}: label {label} exceeds omega {omega}")]
    LabelOutOfRange { tick: usize, label: u32, omega: u32 },
    #[error("no transitions to count (need at least two ticks)")]
    NoTransitions,
    #[error("no emissions to count")]
    NoEmissions,
}

/// Fully labeled ticks with their true states and CSP observations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub lines: Vec<ActivationLine>,
    pub states: Vec<HmmState>,
    pub observations: Vec<HmmObservation>,
}

impl LabeledSequence {
    /// Derives true states `[label, entry]` and observations `[δ, entry]`,
    /// running the CSP estimator on every tick.
    pub fn new(env: &EnvironmentModel, lines: Vec<ActivationLine>) -> Result<Self, LearnError> {
        let entry = env.entry_index();
        let mut states = Vec::with_capacity(lines.len());
        let mut observations = Vec::with_capacity(lines.len());
        for (tick, line) in lines.iter().enumerate() {
            let label = line.label.ok_or(LearnError::Unlabeled(tick))?;
            if label > env.omega() {
                return Err(LearnError::LabelOutOfRange {
                    tick,
                    label,
                    omega: env.omega(),
                });
            }
            states.push(HmmState::new(label, line.states[entry]));
            observations.push(make_observation(&estimate_line(env, line), line, env));
        }
        Ok(Self {
            lines,
            states,
            observations,
        })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn labels(&self) -> Vec<u32> {
        self.states.iter().map(|s| s.omega).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub static_: u64,
    pub likely: u64,
    pub unlikely: u64,
    pub correct: u64,
    pub probable: u64,
    pub unprobable: u64,
    /// Ticks whose true state and observation disagree on the entry bit.
    pub impossible_ticks: Vec<usize>,
}

impl ClassCounts {
    pub fn transitions(&self) -> u64 {
        self.static_ + self.likely + self.unlikely
    }

    pub fn emissions(&self) -> u64 {
        self.correct + self.probable + self.unprobable
    }

    /// Adds another chunk's counts; tick indices of `other` are offset by `offset`.
    pub fn merge(&mut self, other: &ClassCounts, offset: usize) {
        self.static_ += other.static_;
        self.likely += other.likely;
        self.unlikely += other.unlikely;
        self.correct += other.correct;
        self.probable += other.probable;
        self.unprobable += other.unprobable;
        self.impossible_ticks
            .extend(other.impossible_ticks.iter().map(|t| t + offset));
    }
}

pub fn count_classes(data: &LabeledSequence, omega_max: u32) -> ClassCounts {
    let mut c = ClassCounts::default();
    for pair in data.states.windows(2) {
        match classify_transition(pair[0], pair[1], omega_max) {
            TransitionClass::Static => c.static_ += 1,
            TransitionClass::Likely => c.likely += 1,
            TransitionClass::Unlikely => c.unlikely += 1,
        }
    }
    for (tick, (&s, &o)) in data.states.iter().zip(&data.observations).enumerate() {
        match classify_emission(s, o) {
            EmissionClass::Correct => c.correct += 1,
            EmissionClass::Probable => c.probable += 1,
            EmissionClass::Unprobable => c.unprobable += 1,
            EmissionClass::Impossible => c.impossible_ticks.push(tick),
        }
    }
    if !c.impossible_ticks.is_empty() {
        log::warn!(
            "{} ticks with entry-bit mismatch between state and observation",
            c.impossible_ticks.len()
        );
    }
    c
}

/// Add-one smoothed class frequencies: `(n + 1) / (total + 3)` per class.
pub fn fit_params(counts: &ClassCounts) -> Result<HmmParams, LearnError> {
    if counts.transitions() == 0 {
        return Err(LearnError::NoTransitions);
    }
    if counts.emissions() == 0 {
        return Err(LearnError::NoEmissions);
    }
    let (s, l, u) = smoothed(counts.static_, counts.likely, counts.unlikely);
    let (c, p, q) = smoothed(counts.correct, counts.probable, counts.unprobable);
    Ok(HmmParams {
        p_static: s,
        p_likely: l,
        p_unlikely: u,
        p_correct: c,
        p_probable: p,
        p_unprobable: q,
    })
}

fn smoothed(a: u64, b: u64, c: u64) -> (f64, f64, f64) {
    let total = (a + b + c + 3) as f64;
    (
        (a + 1) as f64 / total,
        (b + 1) as f64 / total,
        (c + 1) as f64 / total,
    )
}

/// Counts and fits in one step.
pub fn learn_params(
    env: &EnvironmentModel,
    lines: Vec<ActivationLine>,
) -> Result<(HmmParams, ClassCounts), LearnError> {
    let data = LabeledSequence::new(env, lines)?;
    let counts = count_classes(&data, env.omega());
    Ok((fit_params(&counts)?, counts))
}
