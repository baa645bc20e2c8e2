//! Fits HMM parameters from a simulated training run and prints the
//! class counts alongside the resulting parameter file.
//!
//! cargo run --example learn_params

use occucount::env::parse_environment;
use occucount::learn::learn_params;
use occucount::sim::{parse_graph, simulate, SimConfig};

fn main() {
    let env = parse_environment(include_str!("../configs/aras_fc.env")).unwrap();
    let graph = parse_graph(include_str!("../configs/aras.graph")).unwrap();
    let cfg = SimConfig {
        num_agents: env.omega(),
        steps: 2000,
        seed: 7,
    };
    let lines = simulate(&env, &graph, &cfg).unwrap();

    let (params, counts) = learn_params(&env, lines).unwrap();
    println!(
        "transitions  static={} likely={} unlikely={}",
        counts.static_, counts.likely, counts.unlikely
    );
    println!(
        "emissions    correct={} probable={} unprobable={}",
        counts.correct, counts.probable, counts.unprobable
    );
    println!("\n{}", params.to_text());
}
