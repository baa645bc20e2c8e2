mod common;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use occucount::csp::estimate_line;
use occucount::hmm::{
    classify_emission, classify_transition, EmissionClass, Hmm, HmmObservation, HmmParams, HmmState,
};
use occucount::learn::{count_classes, fit_params, learn_params, LabeledSequence};
use occucount::sim::{simulate, simulate_traced, SimConfig};

#[test]
fn simulation_invariants() {
    for (env_name, graph_name) in [
        ("aras_fc.env", "aras.graph"),
        ("house2.env", "house2.graph"),
    ] {
        let env = common::load_env(env_name);
        let g = common::load_graph(graph_name);
        let outside = g.outside().unwrap();
        for agents in 0..=env.omega() {
            let cfg = SimConfig {
                num_agents: agents,
                steps: 300,
                seed: agents as u64,
            };
            let (lines, trace) = simulate_traced(&env, &g, &cfg).unwrap();
            assert_eq!(lines.len(), 300);
            for (line, occ) in lines.iter().zip(&trace) {
                assert_eq!(occ.iter().sum::<u32>(), agents);
                for (node, &n) in g.nodes().iter().zip(occ) {
                    if let Some(c) = node.capacity {
                        assert!(n <= c, "{} over capacity", node.id);
                    }
                    if let Some(f) = env.index_of(&node.id) {
                        assert_eq!(line.states[f], n > 0);
                    }
                }
                assert_eq!(line.label, Some(agents - occ[outside]));
            }
        }
    }
}

#[test]
fn simulation_is_seeded() {
    let env = common::load_env("aras_fc.env");
    let g = common::load_graph("aras.graph");
    let cfg = SimConfig {
        num_agents: 3,
        steps: 200,
        seed: 42,
    };
    assert_eq!(
        simulate(&env, &g, &cfg).unwrap(),
        simulate(&env, &g, &cfg).unwrap()
    );
    let other = SimConfig { seed: 43, ..cfg };
    assert_ne!(
        simulate(&env, &g, &cfg).unwrap(),
        simulate(&env, &g, &other).unwrap()
    );
}

#[test]
fn csp_never_overestimates_simulated_ticks() {
    for (env_name, graph_name) in [
        ("aras_fc.env", "aras.graph"),
        ("house2.env", "house2.graph"),
    ] {
        let env = common::load_env(env_name);
        let g = common::load_graph(graph_name);
        let cfg = SimConfig {
            num_agents: env.omega(),
            steps: 500,
            seed: 3,
        };
        for line in simulate(&env, &g, &cfg).unwrap() {
            let e = estimate_line(&env, &line);
            assert!(e.feasible);
            assert!(e.delta <= line.label.unwrap());
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, model: &Hmm, len: usize) -> (Vec<HmmState>, Vec<HmmObservation>) {
    let draw = |rng: &mut ChaCha8Rng, row: ndarray::ArrayView1<f64>| {
        WeightedIndex::new(row.iter().copied()).unwrap().sample(rng)
    };
    let mut states = vec![HmmState::from_index(draw(rng, model.prior().view()))];
    for _ in 1..len {
        let prev = states.last().unwrap().index();
        states.push(HmmState::from_index(draw(
            rng,
            model.transitions().row(prev),
        )));
    }
    let obs = states
        .iter()
        .map(|s| HmmObservation::from_index(draw(rng, model.emissions().row(s.index()))))
        .collect();
    (states, obs)
}

#[test]
fn fitting_recovers_generating_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let truth = common::random_params(&mut rng);
        let omega = 4;
        let model = Hmm::new(&truth, omega).unwrap();
        let (states, observations) = sample(&mut rng, &model, 20_000);
        let data = LabeledSequence {
            lines: Vec::new(),
            states: states.clone(),
            observations,
        };
        let fitted = fit_params(&count_classes(&data, omega)).unwrap();
        assert!((fitted.p_static - truth.p_static).abs() < 0.05);
        assert!((fitted.p_likely - truth.p_likely).abs() < 0.05);
        assert!((fitted.p_unlikely - truth.p_unlikely).abs() < 0.05);
        // Emission rows are renormalized, so compare against the class mass
        // actually offered along the sampled path.
        let b = model.emissions();
        let (_, obs_space) = occucount::hmm::build_state_space(omega);
        let mass = |class: EmissionClass| {
            states
                .iter()
                .map(|&s| {
                    obs_space
                        .iter()
                        .filter(|&&v| classify_emission(s, v) == class)
                        .map(|v| b[[s.index(), v.index()]])
                        .sum::<f64>()
                })
                .sum::<f64>()
                / states.len() as f64
        };
        assert!((fitted.p_correct - mass(EmissionClass::Correct)).abs() < 0.05);
        assert!((fitted.p_probable - mass(EmissionClass::Probable)).abs() < 0.05);
        assert!((fitted.p_unprobable - mass(EmissionClass::Unprobable)).abs() < 0.05);
    }
}

#[test]
fn counts_cover_every_tick() {
    let env = common::load_env("aras_fc.env");
    let g = common::load_graph("aras.graph");
    let lines = simulate(
        &env,
        &g,
        &SimConfig {
            num_agents: 4,
            steps: 500,
            seed: 8,
        },
    )
    .unwrap();
    let (params, counts) = learn_params(&env, lines.clone()).unwrap();
    assert_eq!(counts.transitions(), 499);
    assert_eq!(
        counts.emissions() + counts.impossible_ticks.len() as u64,
        500
    );
    assert!(counts.impossible_ticks.is_empty());
    params.validate().unwrap();
    let data = LabeledSequence::new(&env, lines).unwrap();
    let likely = data
        .states
        .windows(2)
        .filter(|w| classify_transition(w[0], w[1], 4) == occucount::hmm::TransitionClass::Likely)
        .count() as u64;
    assert_eq!(likely, counts.likely);
}

#[test]
fn unlabeled_data_cannot_be_fitted() {
    let env = common::load_env("aras_fc.env");
    let g = common::load_graph("aras.graph");
    let mut lines = simulate(
        &env,
        &g,
        &SimConfig {
            num_agents: 2,
            steps: 20,
            seed: 1,
        },
    )
    .unwrap();
    lines[5].label = None;
    assert!(learn_params(&env, lines).is_err());
    assert!(learn_params(&env, Vec::new()).is_err());
    let _ = HmmParams::default();
}
