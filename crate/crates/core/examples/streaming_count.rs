//! Counts a live stream tick by tick with both pipelines.
//!
//! cargo run --example streaming_count

use occucount::env::parse_environment;
use occucount::hmm::Hmm;
use occucount::infer::WindowConfig;
use occucount::learn::learn_params;
use occucount::pipeline::Counter;
use occucount::sim::{parse_graph, simulate, SimConfig};

fn main() {
    let env = parse_environment(include_str!("../configs/aras_fc.env")).unwrap();
    let graph = parse_graph(include_str!("../configs/aras.graph")).unwrap();
    let sim = |steps, seed| {
        simulate(
            &env,
            &graph,
            &SimConfig {
                num_agents: 4,
                steps,
                seed,
            },
        )
        .unwrap()
    };

    let (params, _) = learn_params(&env, sim(1000, 1)).unwrap();
    let model = Hmm::new(&params, env.omega()).unwrap();
    let mut csp = Counter::csp(&env);
    let mut hmm = Counter::csp_hmm(&env, &model, WindowConfig::default());

    println!("tick  truth  csp  csp+hmm");
    for (t, line) in sim(40, 99).iter().enumerate() {
        let a = csp.push(line).unwrap();
        let b = hmm.push(line).unwrap();
        println!("{t:>4}  {:>5}  {a:>3}  {b:>7}", line.label.unwrap());
    }
}
