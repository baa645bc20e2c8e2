//! Simulates residents walking around the ARAS-like house and prints the
//! ticks where occupancy changes.
//!
//! cargo run --example simulate_dataset -- 3 42

use occucount::env::parse_environment;
use occucount::sim::{parse_graph, simulate_traced, SimConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let agents = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);

    let env = parse_environment(include_str!("../configs/aras_fc.env")).unwrap();
    let graph = parse_graph(include_str!("../configs/aras.graph")).unwrap();
    let cfg = SimConfig {
        num_agents: agents,
        steps: 400,
        seed,
    };
    let (lines, occupancy) = simulate_traced(&env, &graph, &cfg).unwrap();

    let mut shown = 0;
    for (t, (line, occ)) in lines.iter().zip(&occupancy).enumerate() {
        if (t > 0 && occupancy[t - 1] == *occ) || shown == 30 {
            continue;
        }
        shown += 1;
        let here: Vec<String> = graph
            .nodes()
            .iter()
            .zip(occ)
            .filter(|(_, &n)| n > 0)
            .map(|(node, n)| format!("{}:{n}", node.id))
            .collect();
        println!("{t:>3}  {line}   {}", here.join(" "));
    }
}
