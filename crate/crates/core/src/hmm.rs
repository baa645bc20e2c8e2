//! The person-counting hidden Markov model.
//!
//! States are pairs `[ω, α]` of the number of persons present and the entry
//! FoI state; observations are pairs `[δ, α]` of the CSP estimate and the
//! entry FoI state. Both spaces hold `2(Ω+1)` symbols indexed as
//! `2ω + α`, so `[0,false]` is 0 and `[Ω,true]` is `2Ω+1`.
//!
//! The transition and emission matrices are fully determined by six scalars
//! ([`HmmParams`]) and the classification rules in [`classify_transition`]
//! and [`classify_emission`].

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("probability `{name}` = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("{which} budget sums to {sum}, expected 1")]
    Budget { which: &'static str, sum: f64 },
    #[error("omega must be >= 1")]
    ZeroOmega,
    #[error("parameter file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("row {row} of {matrix} sums to {sum}")]
    NotStochastic {
        matrix: &'static str,
        row: usize,
        sum: f64,
    },
}

/// The six scalar probabilities defining the transition and emission matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmmParams {
    pub p_static: f64,
    pub p_likely: f64,
    pub p_unlikely: f64,
    pub p_correct: f64,
    pub p_probable: f64,
    pub p_unprobable: f64,
}

impl Default for HmmParams {
    /// Placeholder values used when no learned parameters are supplied.
    fn default() -> Self {
        Self {
            p_static: 0.8,
            p_likely: 0.15,
            p_unlikely: 0.05,
            p_correct: 0.7,
            p_probable: 0.2,
            p_unprobable: 0.1,
        }
    }
}

impl HmmParams {
    pub fn new(
        p_static: f64,
        p_likely: f64,
        p_unlikely: f64,
        p_correct: f64,
        p_probable: f64,
        p_unprobable: f64,
    ) -> Result<Self, HmmError> {
        let p = Self {
            p_static,
            p_likely,
            p_unlikely,
            p_correct,
            p_probable,
            p_unprobable,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), HmmError> {
        let named = [
            ("p_static", self.p_static),
            ("p_likely", self.p_likely),
            ("p_unlikely", self.p_unlikely),
            ("p_correct", self.p_correct),
            ("p_probable", self.p_probable),
            ("p_unprobable", self.p_unprobable),
        ];
        for (name, value) in named {
            if !(0.0..=1.0).contains(&value) {
                return Err(HmmError::OutOfRange { name, value });
            }
        }
        let t = self.p_static + self.p_likely + self.p_unlikely;
        if (t - 1.0).abs() > BUDGET_TOL {
            return Err(HmmError::Budget {
                which: "transition",
                sum: t,
            });
        }
        let e = self.p_correct + self.p_probable + self.p_unprobable;
        if (e - 1.0).abs() > BUDGET_TOL {
            return Err(HmmError::Budget {
                which: "emission",
                sum: e,
            });
        }
        Ok(())
    }

    /// Parses the key-value parameter file (TOML syntax, six keys).
    pub fn from_text(text: &str) -> Result<Self, HmmError> {
        let p: Self = toml::from_str(text).map_err(|e| HmmError::Format(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("plain struct serializes")
    }

    pub fn load(path: &Path) -> Result<Self, HmmError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HmmState {
    pub omega: u32,
    pub alpha: bool,
}

impl HmmState {
    pub fn new(omega: u32, alpha: bool) -> Self {
        Self { omega, alpha }
    }

    pub fn index(self) -> usize {
        2 * self.omega as usize + self.alpha as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            omega: (i / 2) as u32,
            alpha: i % 2 == 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HmmObservation {
    pub delta: u32,
    pub alpha: bool,
}

impl HmmObservation {
    pub fn new(delta: u32, alpha: bool) -> Self {
        Self { delta, alpha }
    }

    pub fn index(self) -> usize {
        2 * self.delta as usize + self.alpha as usize
    }

    pub fn from_index(k: usize) -> Self {
        Self {
            delta: (k / 2) as u32,
            alpha: k % 2 == 1,
        }
    }
}

/// Canonical state and observation lists for a given Ω.
pub fn build_state_space(omega_max: u32) -> (Vec<HmmState>, Vec<HmmObservation>) {
    let n = 2 * (omega_max as usize + 1);
    (
        (0..n).map(HmmState::from_index).collect(),
        (0..n).map(HmmObservation::from_index).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionClass {
    Static,
    Likely,
    Unlikely,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmissionClass {
    Impossible,
    Correct,
    Probable,
    Unprobable,
}

/// Likely successors of a state, with their share of `p_likely`.
///
/// Interior rows follow the entry-point dynamics: the entry FoI switching on
/// keeps the count or adds one person; switching off keeps it or removes
/// one. The four border rows use a fixed table.
pub fn likely_successors(s: HmmState, omega_max: u32) -> Vec<(HmmState, f64)> {
    let st = HmmState::new;
    let w = s.omega;
    if omega_max == 0 {
        return Vec::new();
    }
    match (w, s.alpha) {
        (0, false) => vec![(st(1, true), 1.0)],
        (0, true) => vec![(st(0, false), 0.5), (st(1, true), 0.5)],
        (w, false) if w == omega_max => vec![(st(w, true), 1.0)],
        (w, true) if w == omega_max => vec![(st(w - 1, false), 1.0)],
        (w, false) => vec![(st(w, true), 0.5), (st(w + 1, true), 0.5)],
        (w, true) => vec![(st(w, false), 0.5), (st(w - 1, false), 0.5)],
    }
}

pub fn classify_transition(from: HmmState, to: HmmState, omega_max: u32) -> TransitionClass {
    if from == to {
        TransitionClass::Static
    } else if likely_successors(from, omega_max)
        .iter()
        .any(|&(s, _)| s == to)
    {
        TransitionClass::Likely
    } else {
        TransitionClass::Unlikely
    }
}

pub fn classify_emission(s: HmmState, v: HmmObservation) -> EmissionClass {
    use std::cmp::Ordering::*;
    if s.alpha != v.alpha {
        return EmissionClass::Impossible;
    }
    match v.delta.cmp(&s.omega) {
        Equal => EmissionClass::Correct,
        Less => EmissionClass::Probable,
        Greater => EmissionClass::Unprobable,
    }
}

/// Row-stochastic transition matrix.
///
/// Static cells get `p_static`, likely cells their share of `p_likely`, and
/// the remaining mass is spread evenly over the other cells of the row.
pub fn build_transition_matrix(params: &HmmParams, omega_max: u32) -> Array2<f64> {
    let (states, _) = build_state_space(omega_max);
    let n = states.len();
    let mut a = Array2::zeros((n, n));
    for &s in &states {
        let i = s.index();
        let likely = likely_successors(s, omega_max);
        let likely_mass: f64 = likely
            .iter()
            .map(|&(_, share)| share * params.p_likely)
            .sum();
        let residual = 1.0 - params.p_static - likely_mass;
        let rest = (n - likely.len() - 1) as f64;
        for j in 0..n {
            a[[i, j]] = residual / rest;
        }
        a[[i, i]] = params.p_static;
        for (t, share) in likely {
            a[[i, t.index()]] = share * params.p_likely;
        }
    }
    a
}

/// Raw (unnormalized) emission weight of `v` in state `s`.
pub fn emission_weight(params: &HmmParams, s: HmmState, v: HmmObservation, omega_max: u32) -> f64 {
    match classify_emission(s, v) {
        EmissionClass::Impossible => 0.0,
        EmissionClass::Correct => params.p_correct,
        EmissionClass::Probable => params.p_probable / s.omega as f64,
        EmissionClass::Unprobable => params.p_unprobable / (omega_max - v.delta).max(1) as f64,
    }
}

/// Row-stochastic emission matrix: raw weights renormalized per row over
/// the alpha-compatible observations.
pub fn build_emission_matrix(params: &HmmParams, omega_max: u32) -> Array2<f64> {
    let (states, obs) = build_state_space(omega_max);
    let n = states.len();
    let mut b = Array2::zeros((n, n));
    for &s in &states {
        let i = s.index();
        for &v in &obs {
            b[[i, v.index()]] = emission_weight(params, s, v, omega_max);
        }
        let total: f64 = b.row(i).sum();
        if total > 0.0 {
            b.row_mut(i).mapv_inplace(|x| x / total);
        } else {
            // All compatible weights vanished (zero emission budget); fall
            // back to uniform over compatible cells.
            let compatible = obs.iter().filter(|v| v.alpha == s.alpha).count() as f64;
            for &v in obs.iter().filter(|v| v.alpha == s.alpha) {
                b[[i, v.index()]] = 1.0 / compatible;
            }
        }
    }
    b
}

pub fn uniform_prior(omega_max: u32) -> Array1<f64> {
    let n = 2 * (omega_max as usize + 1);
    Array1::from_elem(n, 1.0 / n as f64)
}

/// A discrete HMM over the person-counting state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    omega_max: u32,
    states: Vec<HmmState>,
    observations: Vec<HmmObservation>,
    pi: Array1<f64>,
    a: Array2<f64>,
    b: Array2<f64>,
}

impl Hmm {
    pub fn new(params: &HmmParams, omega_max: u32) -> Result<Self, HmmError> {
        if omega_max == 0 {
            return Err(HmmError::ZeroOmega);
        }
        params.validate()?;
        let (states, observations) = build_state_space(omega_max);
        Ok(Self {
            omega_max,
            states,
            observations,
            pi: uniform_prior(omega_max),
            a: build_transition_matrix(params, omega_max),
            b: build_emission_matrix(params, omega_max),
        })
    }

    /// Model over the same state space with arbitrary matrices, checked for
    /// shape and row-stochasticity.
    pub fn from_matrices(
        omega_max: u32,
        pi: Array1<f64>,
        a: Array2<f64>,
        b: Array2<f64>,
    ) -> Result<Self, HmmError> {
        if omega_max == 0 {
            return Err(HmmError::ZeroOmega);
        }
        let (states, observations) = build_state_space(omega_max);
        let n = states.len();
        if pi.len() != n || a.dim() != (n, n) || b.dim() != (n, n) {
            return Err(HmmError::Shape(format!("expected {n} states")));
        }
        let pi_sum = pi.sum();
        if (pi_sum - 1.0).abs() > BUDGET_TOL {
            return Err(HmmError::NotStochastic {
                matrix: "pi",
                row: 0,
                sum: pi_sum,
            });
        }
        for (name, m) in [("A", &a), ("B", &b)] {
            for (row, r) in m.rows().into_iter().enumerate() {
                let sum = r.sum();
                if (sum - 1.0).abs() > BUDGET_TOL || r.iter().any(|&x| x < 0.0) {
                    return Err(HmmError::NotStochastic {
                        matrix: name,
                        row,
                        sum,
                    });
                }
            }
        }
        Ok(Self {
            omega_max,
            states,
            observations,
            pi,
            a,
            b,
        })
    }

    pub fn omega_max(&self) -> u32 {
        self.omega_max
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[HmmState] {
        &self.states
    }

    pub fn observations(&self) -> &[HmmObservation] {
        &self.observations
    }

    pub fn prior(&self) -> &Array1<f64> {
        &self.pi
    }

    pub fn transitions(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn emissions(&self) -> &Array2<f64> {
        &self.b
    }
}
