//! Online decoding over a sliding window of observations.

use std::collections::VecDeque;

use thiserror::Error;

use crate::csp::CspEstimate;
use crate::env::{ActivationLine, EnvironmentModel};
use crate::hmm::{Hmm, HmmObservation, HmmState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferError {
    #[error("empty observation sequence")]
    Empty,
    #[error("observation delta {delta} exceeds model omega {omega}")]
    OutOfAlphabet { delta: u32, omega: u32 },
    #[error("every state path has zero probability at tick {0}")]
    ZeroProbability(usize),
    #[error("window size must be >= 1")]
    ZeroWindow,
}

/// Observation for one tick: the CSP estimate and the entry FoI's bit.
pub fn make_observation(
    estimate: &CspEstimate,
    line: &ActivationLine,
    env: &EnvironmentModel,
) -> HmmObservation {
    HmmObservation::new(estimate.delta, line.states[env.entry_index()])
}

/// Most probable state path and its log probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSeq {
    pub states: Vec<HmmState>,
    pub log_prob: f64,
}

impl DecodedSeq {
    pub fn counts(&self) -> Vec<u32> {
        self.states.iter().map(|s| s.omega).collect()
    }
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Precomputed log-space view of a model for repeated decoding.
#[derive(Debug, Clone)]
pub struct LogModel {
    omega: u32,
    n: usize,
    log_pi: Vec<f64>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
}

impl LogModel {
    pub fn new(model: &Hmm) -> Self {
        let n = model.num_states();
        Self {
            omega: model.omega_max(),
            n,
            log_pi: model.prior().iter().map(|&x| ln(x)).collect(),
            log_a: model.transitions().iter().map(|&x| ln(x)).collect(),
            log_b: model.emissions().iter().map(|&x| ln(x)).collect(),
        }
    }

    /// Viterbi decoding in log space.
    ///
    /// Ties go to the lower state index, both for the final state and for
    /// every back-pointer.
    pub fn viterbi<'o>(
        &self,
        obs: impl IntoIterator<Item = &'o HmmObservation>,
    ) -> Result<DecodedSeq, InferError> {
        let n = self.n;
        let mut score = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut back: Vec<Vec<usize>> = Vec::new();
        let mut seen = false;
        for (t, o) in obs.into_iter().enumerate() {
            seen = true;
            if o.delta > self.omega {
                return Err(InferError::OutOfAlphabet {
                    delta: o.delta,
                    omega: self.omega,
                });
            }
            let k = o.index();
            if t == 0 {
                for (i, s) in score.iter_mut().enumerate() {
                    *s = self.log_pi[i] + self.log_b[i * n + k];
                }
            } else {
                let mut ptr = vec![0; n];
                for j in 0..n {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for (i, &prev) in score.iter().enumerate() {
                        let s = prev + self.log_a[i * n + j];
                        if s > best {
                            best = s;
                            arg = i;
                        }
                    }
                    next[j] = best + self.log_b[j * n + k];
                    ptr[j] = arg;
                }
                std::mem::swap(&mut score, &mut next);
                back.push(ptr);
            }
            if score.iter().all(|&s| s == f64::NEG_INFINITY) {
                return Err(InferError::ZeroProbability(t));
            }
        }
        if !seen {
            return Err(InferError::Empty);
        }
        let len = back.len() + 1;
        let mut last = 0;
        for i in 1..n {
            if score[i] > score[last] {
                last = i;
            }
        }
        let log_prob = score[last];
        let mut path = vec![last; len];
        for t in (1..len).rev() {
            path[t - 1] = back[t - 1][path[t]];
        }
        Ok(DecodedSeq {
            states: path.into_iter().map(HmmState::from_index).collect(),
            log_prob,
        })
    }
}

/// Most probable state path for `obs` under the model.
pub fn viterbi(model: &Hmm, obs: &[HmmObservation]) -> Result<DecodedSeq, InferError> {
    if obs.is_empty() {
        return Err(InferError::Empty);
    }
    LogModel::new(model).viterbi(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    pub size: usize,
}

impl WindowConfig {
    pub fn new(size: usize) -> Result<Self, InferError> {
        if size == 0 {
            return Err(InferError::ZeroWindow);
        }
        Ok(Self { size })
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { size: 10 }
    }
}

/// Online decoder holding the last `size` observations.
///
/// Each push decodes the current window from the uniform prior and returns
/// the person count of the window's final state.
#[derive(Debug, Clone)]
pub struct SlidingDecoder {
    model: LogModel,
    window: VecDeque<HmmObservation>,
    size: usize,
}

impl SlidingDecoder {
    pub fn new(model: &Hmm, cfg: WindowConfig) -> Self {
        Self {
            model: LogModel::new(model),
            window: VecDeque::with_capacity(cfg.size),
            size: cfg.size,
        }
    }

    pub fn push(&mut self, obs: HmmObservation) -> Result<u32, InferError> {
        if self.window.len() == self.size {
            self.window.pop_front();
        }
        self.window.push_back(obs);
        let decoded = self.model.viterbi(self.window.iter())?;
        Ok(decoded.states.last().expect("window is non-empty").omega)
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn reset(&mut self) {
        self.window.clear();
    }
}

/// One count per tick, each computed from the window ending at that tick.
pub fn sliding_window_decode(
    model: &Hmm,
    obs: &[HmmObservation],
    cfg: WindowConfig,
) -> Result<Vec<u32>, InferError> {
    let mut dec = SlidingDecoder::new(model, cfg);
    obs.iter().map(|&o| dec.push(o)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::estimate_line;
    use crate::env::parse_environment;
    use crate::hmm::HmmParams;

    fn sharp() -> HmmParams {
        HmmParams::new(0.6, 0.399, 0.001, 0.998, 0.001, 0.001).unwrap()
    }

    #[test]
    fn observation_from_line() {
        let env = parse_environment("omega 3\nfoi door 1 1 entry\nfoi a 1 1\nfoi b 1 1\n").unwrap();
        let line = ActivationLine::new(vec![true, true, false], None);
        let o = make_observation(&estimate_line(&env, &line), &line, &env);
        assert_eq!(o, HmmObservation::new(2, true));
        let idle = ActivationLine::idle(3);
        assert_eq!(
            make_observation(&estimate_line(&env, &idle), &idle, &env),
            HmmObservation::new(0, false)
        );
        let env2 =
            parse_environment("omega 2\nfoi door 1 1 entry\nfoi a 1 1\nfoi b 1 1\n").unwrap();
        let all = ActivationLine::new(vec![true, true, true], None);
        let est = estimate_line(&env2, &all);
        assert!(!est.feasible);
        assert_eq!(
            make_observation(&est, &all, &env2),
            HmmObservation::new(2, true)
        );
    }

    #[test]
    fn single_observation() {
        let model = Hmm::new(&sharp(), 3).unwrap();
        let d = viterbi(&model, &[HmmObservation::new(0, false)]).unwrap();
        assert_eq!(d.states, vec![HmmState::new(0, false)]);
    }

    #[test]
    fn recovers_noiseless_path() {
        let model = Hmm::new(&sharp(), 3).unwrap();
        let path = [
            (0, false),
            (1, true),
            (1, false),
            (2, true),
            (2, true),
            (1, false),
            (1, false),
        ];
        let obs: Vec<_> = path
            .iter()
            .map(|&(w, a)| HmmObservation::new(w, a))
            .collect();
        let d = viterbi(&model, &obs).unwrap();
        let expected: Vec<_> = path.iter().map(|&(w, a)| HmmState::new(w, a)).collect();
        assert_eq!(d.states, expected);
    }

    #[test]
    fn empty_inputs() {
        let model = Hmm::new(&HmmParams::default(), 2).unwrap();
        assert_eq!(viterbi(&model, &[]).unwrap_err(), InferError::Empty);
        assert!(sliding_window_decode(&model, &[], WindowConfig::default())
            .unwrap()
            .is_empty());
        assert!(WindowConfig::new(0).is_err());
    }

    #[test]
    fn rejects_foreign_symbols() {
        let model = Hmm::new(&HmmParams::default(), 2).unwrap();
        assert!(matches!(
            viterbi(&model, &[HmmObservation::new(3, false)]),
            Err(InferError::OutOfAlphabet { .. })
        ));
    }

    #[test]
    fn constant_stream_settles() {
        let model = Hmm::new(&HmmParams::default(), 4).unwrap();
        let obs = vec![HmmObservation::new(2, false); 30];
        let counts = sliding_window_decode(&model, &obs, WindowConfig::new(10).unwrap()).unwrap();
        let tail = &counts[10..];
        assert!(tail.iter().all(|&c| c == tail[0]));
    }

    #[test]
    fn full_window_matches_offline() {
        let model = Hmm::new(&HmmParams::default(), 3).unwrap();
        let obs: Vec<_> = [
            (0, false),
            (1, true),
            (3, true),
            (1, false),
            (2, false),
            (2, true),
        ]
        .iter()
        .map(|&(d, a)| HmmObservation::new(d, a))
        .collect();
        let online =
            sliding_window_decode(&model, &obs, WindowConfig::new(obs.len()).unwrap()).unwrap();
        let offline = viterbi(&model, &obs).unwrap();
        assert_eq!(
            *online.last().unwrap(),
            offline.states.last().unwrap().omega
        );
    }
}
