//! Minimum person count for a few hand-built ticks of a small flat.
//!
//! cargo run --example csp_estimate

use occucount::csp::estimate_line;
use occucount::env::{parse_environment, ActivationLine};

const FLAT: &str = "\
omega 4
foi door 1 1 entry
foi couch 1 3
foi kitchen_motion 1 inf
foi bed 1 2
edge couch kitchen_motion
";

fn main() {
    let env = parse_environment(FLAT).expect("valid environment");
    let ticks = [
        [false, false, false, false],
        [true, false, false, false],
        [false, true, true, false],
        [false, true, false, true],
        [true, true, true, true],
    ];
    for bits in ticks {
        let line = ActivationLine::new(bits.to_vec(), None);
        let est = estimate_line(&env, &line);
        print!("{line}  ->  delta={}", est.delta);
        if let Some(w) = est.witness {
            let sets: Vec<String> = env
                .fois()
                .iter()
                .zip(&w.sets)
                .filter(|(_, s)| !s.is_empty())
                .map(|(f, s)| format!("{}={:?}", f.id, s.iter().collect::<Vec<_>>()))
                .collect();
            print!("  [{}]", sets.join(" "));
        }
        println!();
    }
}
