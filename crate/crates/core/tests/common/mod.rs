#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::{Array1, Array2};
use rand::Rng;

use occucount::csp::CspInstance;
use occucount::env::{parse_environment, EnvironmentModel};
use occucount::hmm::{Hmm, HmmObservation, HmmParams, HmmState};
use occucount::sim::{parse_graph, MovementGraph};

pub fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

pub fn load_env(name: &str) -> EnvironmentModel {
    parse_environment(&std::fs::read_to_string(config(name)).unwrap()).unwrap()
}

pub fn load_graph(name: &str) -> MovementGraph {
    parse_graph(&std::fs::read_to_string(config(name)).unwrap()).unwrap()
}

/// Random instance with Ω in 1..=max_omega and 0..=max_fois active FoIs.
pub fn random_instance<R: Rng>(rng: &mut R, max_omega: u32, max_fois: usize) -> CspInstance {
    let omega = rng.gen_range(1..=max_omega);
    let n = rng.gen_range(0..=max_fois);
    let arities = (0..n)
        .map(|_| {
            let lo = rng.gen_range(1..=omega);
            let hi = if rng.gen_bool(0.3) {
                omega
            } else {
                rng.gen_range(lo..=omega)
            };
            (lo, hi)
        })
        .collect();
    let density = rng.gen_range(0.0..1.0);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    CspInstance::from_parts(arities, &edges, omega)
}

pub fn random_params<R: Rng>(rng: &mut R) -> HmmParams {
    let mut triple = || {
        let x: [f64; 3] = [
            rng.gen_range(0.01..1.0),
            rng.gen_range(0.01..1.0),
            rng.gen_range(0.01..1.0),
        ];
        let s: f64 = x.iter().sum();
        [x[0] / s, x[1] / s, x[2] / s]
    };
    let [a, b, c] = triple();
    let [d, e, f] = triple();
    HmmParams::new(a, b, c, d, e, f).unwrap()
}

fn random_stochastic<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    let mut m = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(0.0..1.0));
    for mut r in m.rows_mut() {
        let s = r.sum();
        r.mapv_inplace(|x| x / s);
    }
    m
}

/// Model over the Ω state space with unstructured random matrices.
pub fn random_dense_model<R: Rng>(rng: &mut R, omega: u32) -> Hmm {
    let n = 2 * (omega as usize + 1);
    let pi = random_stochastic(rng, 1, n).row(0).to_owned();
    let a = random_stochastic(rng, n, n);
    let b = random_stochastic(rng, n, n);
    Hmm::from_matrices(omega, Array1::from(pi.to_vec()), a, b).unwrap()
}

pub fn random_observations<R: Rng>(rng: &mut R, omega: u32, len: usize) -> Vec<HmmObservation> {
    (0..len)
        .map(|_| HmmObservation::new(rng.gen_range(0..=omega), rng.gen_bool(0.5)))
        .collect()
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Exhaustive MAP path search over all |S|^T paths.
///
/// Path scores are accumulated left to right as
/// `ln π + ln b, then + ln a + ln b` per step. Among equal-score paths the
/// one smallest when compared from the last state backwards wins.
pub fn brute_force_viterbi(model: &Hmm, obs: &[HmmObservation]) -> (Vec<HmmState>, f64) {
    let n = model.num_states();
    let t_len = obs.len();
    let (pi, a, b) = (model.prior(), model.transitions(), model.emissions());
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut path = vec![0usize; t_len];
    let total = n.pow(t_len as u32);
    for code in 0..total {
        let mut c = code;
        for q in path.iter_mut() {
            *q = c % n;
            c /= n;
        }
        let mut score = ln(pi[path[0]]) + ln(b[[path[0], obs[0].index()]]);
        for t in 1..t_len {
            score = score + ln(a[[path[t - 1], path[t]]]) + ln(b[[path[t], obs[t].index()]]);
        }
        let better = match &best {
            None => true,
            Some((bp, bs)) => {
                score > *bs || (score == *bs && path.iter().rev().lt(bp.iter().rev()))
            }
        };
        if better {
            best = Some((path.clone(), score));
        }
    }
    let (p, s) = best.unwrap();
    (p.into_iter().map(HmmState::from_index).collect(), s)
}
