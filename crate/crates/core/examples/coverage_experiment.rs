//! Full versus partial sensor coverage over a few omegas. Pooled rows go
//! to stdout as one CSV block per layout.
//!
//! cargo run --release --example coverage_experiment

use occucount::env::parse_environment;
use occucount::eval::write_csv;
use occucount::experiment::{report_rows, run_experiment, ExperimentConfig};
use occucount::sim::parse_graph;

fn main() {
    let full = parse_environment(include_str!("../configs/aras_fc.env")).unwrap();
    let partial = parse_environment(include_str!("../configs/aras_partial.env")).unwrap();
    let graph = parse_graph(include_str!("../configs/aras.graph")).unwrap();

    for (name, observed) in [("full", None), ("partial", Some(partial))] {
        let mut cfg = ExperimentConfig::new(full.clone(), graph.clone());
        cfg.observed = observed;
        cfg.omegas = vec![2, 4, 6];
        cfg.runs = 3;
        cfg.seed = 1;
        let cells = run_experiment(&cfg).unwrap();
        for c in &cells {
            eprintln!(
                "{name:<8} omega={} csp={:.3} csp+hmm={:.3}",
                c.omega, c.pooled.csp.accuracy, c.pooled.csp_hmm.accuracy
            );
        }
        let pooled: Vec<_> = report_rows(&cells)
            .into_iter()
            .filter(|r| r.run == "all" && r.true_count == "all")
            .collect();
        println!("# {name}");
        write_csv(std::io::stdout().lock(), &pooled).unwrap();
    }
}
